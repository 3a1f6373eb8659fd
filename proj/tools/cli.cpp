#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "fa1f/errors.hpp"
#include "fa1f/exact.hpp"
#include "fa1f/meet.hpp"
#include "fa1f/paths.hpp"
#include "fa1f/scans.hpp"

#ifndef FA1F_VERSION
#define FA1F_VERSION "unknown"
#endif

namespace fa1f::cli {

namespace {

constexpr const char* kSubcommands[] = {"gap-scan", "persistence", "tau0", "exact", "meet", "path"};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& v, const char* sep = ",") {
  std::ostringstream s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s << sep;
    if constexpr (std::is_floating_point_v<T>) s << num(v[i]);
    else s << v[i];
  }
  return s.str();
}

std::unique_ptr<CLI::App> build_app(RunConfig& c) {
  auto app = std::make_unique<CLI::App>("Numerical laboratory for the FA1f kinetically constrained model", "fa1f");
  app->set_version_flag("--version", FA1F_VERSION);
  app->require_subcommand(1);
  app->add_option("--q-list", c.q_list, "Strictly decreasing vacancy densities in (0,1)")->delimiter(',');
  app->add_option("--dim", c.dim, "Lattice dimension")->check(CLI::PositiveNumber);
  app->add_option("--samples", c.samples, "Monte Carlo samples per q (variational estimators)");
  app->add_option("--n-traj", c.n_traj, "KMC trajectories per q");
  app->add_option("--seed", c.seed, "Base seed");
  app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  app->add_option("--method", c.method, "tau0 estimator")->check(CLI::IsMember({"variational", "kmc"}));
  app->add_option("--q0", c.q0, "Reference density for the critical length")->check(CLI::Range(0.0, 1.0));
  app->add_option("--c", c.c, "meet: torus side is ceil(c q^-1/2)")->check(CLI::PositiveNumber);
  app->add_option("--ell", c.ell, "Window side")->check(CLI::PositiveNumber);
  app->add_option("--side", c.side, "KMC torus side")->check(CLI::Range(2, 1 << 20));
  app->add_option("--t-max", c.t_max, "KMC censoring time")->check(CLI::PositiveNumber);
  app->add_option("--box", c.box, "Box extents, e.g. 3x3");
  app->add_option("--torus", c.torus, "Torus extents, e.g. 8x8");
  app->add_option("--graph", c.graph, "Edge-list file: 'n m' then m lines 'u v'");
  app->add_option("--origin", c.origin, "Origin coordinates for --box/--torus")->delimiter(',');
  app->add_option("--z", c.z, "path: target of the canonical path")->delimiter(',');
  app->add_option("--cone", c.cone, "path: apex of the cone (needs --ell)")->delimiter(',');
  app->add_option("--out", c.out, "Output CSV path");
  app->add_option("--config", c.config_file, "key=value file; command line flags win");
  for (const char* name : kSubcommands) app->add_subcommand(name)->fallthrough();
  return app;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Extra arguments for every file key whose flag was not given on the command line.
std::vector<std::string> config_file_args(const std::string& path, const CLI::App& parsed) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::vector<std::string> extra;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    const CLI::Option* opt = key == "config" ? nullptr : parsed.get_option_no_throw("--" + key);
    if (opt == nullptr) throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (opt->count() == 0) {
      extra.push_back("--" + key);
      extra.push_back(value);
    }
  }
  return extra;
}

void parse_into(CLI::App& app, std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());
  app.parse(args);
}

std::vector<int> parse_extents(const std::string& s) {
  std::vector<int> e;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, 'x')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(part, &used);
      if (used != part.size() || v < 1) throw std::invalid_argument(part);
      e.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("bad extents '" + s + "', expected e.g. 4x4");
    }
  }
  if (e.empty()) throw UsageError("bad extents '" + s + "'");
  return e;
}

bool needs_q_list(const std::string& sub) {
  return sub == "gap-scan" || sub == "persistence" || sub == "tau0" || sub == "exact";
}

void validate(const RunConfig& c) {
  if (needs_q_list(c.subcommand) && c.q_list.empty()) throw UsageError("--q-list is required for " + c.subcommand);
  for (std::size_t i = 0; i < c.q_list.size(); ++i) {
    const double q = c.q_list[i];
    if (!(q > 0.0 && q < 1.0)) throw UsageError("q=" + num(q) + " is outside (0,1)");
    if (i > 0 && !(q < c.q_list[i - 1])) throw UsageError("--q-list must be strictly decreasing");
  }
  const bool variational = c.subcommand == "gap-scan" || (c.subcommand == "tau0" && c.method == "variational");
  const bool kmc = c.subcommand == "persistence" || (c.subcommand == "tau0" && c.method == "kmc");
  if (variational && c.samples < 100) throw UsageError("--samples must be at least 100");
  if (kmc && c.n_traj < 100) throw UsageError("--n-traj must be at least 100");
  const int volumes = !c.box.empty() + !c.torus.empty() + !c.graph.empty();
  if (c.subcommand == "exact" && volumes != 1) throw UsageError("exact needs exactly one of --box, --torus, --graph");
  if (c.subcommand == "meet") {
    if (!c.box.empty()) throw UsageError("meet works on --torus or --graph");
    if (volumes + !c.q_list.empty() != 1) throw UsageError("meet needs exactly one of --torus, --graph, --q-list");
  }
  if (c.subcommand == "path") {
    if (c.z.empty() == c.cone.empty()) throw UsageError("path needs exactly one of --z, --cone");
    if (!c.cone.empty() && !c.ell) throw UsageError("--cone needs --ell");
  }
  if (!c.box.empty()) parse_extents(c.box);
  if (!c.torus.empty()) parse_extents(c.torus);
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw UsageError("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

McOptions mc_options(const RunConfig& c) { return {c.seed, c.threads, McOptions{}.block_size}; }

KmcSettings kmc_settings(const RunConfig& c) { return {c.q0, c.side, c.t_max}; }

int dim_or(const RunConfig& c, int fallback) { return c.dim > 0 ? c.dim : fallback; }

std::string scan_footer(const ScanResult& r) {
  std::ostringstream s;
  if (r.fit) {
    s << "#fit slope=" << num(r.fit->slope) << " err=" << num(r.fit->slope_err) << " r2=" << num(r.fit->r2)
      << " series=" << r.fit_label << '\n';
  }
  for (const auto& f : r.flatness) s << "#flatness " << f.model << "=" << num(f.ratio) << '\n';
  for (const auto& n : r.notes) s << "#note " << n << '\n';
  return s.str();
}

std::string scan_csv(const ScanResult& r) {
  std::ostringstream s;
  s << "q,value,stderr,n,label\n";
  for (const auto& row : r.rows) {
    s << num(row.q) << ',' << num(row.value.mean) << ',' << num(row.value.error) << ',' << row.value.n << ','
      << row.label << '\n';
  }
  s << scan_footer(r);
  return s.str();
}

void print_summary(const ScanResult& r, std::ostream& out) {
  if (r.fit) {
    out << "#fit slope=" << num(r.fit->slope) << " err=" << num(r.fit->slope_err) << " r2=" << num(r.fit->r2)
        << " series=" << r.fit_label << '\n';
  } else {
    out << "#fit unavailable (fewer than three positive points)\n";
  }
  for (const auto& f : r.flatness) out << "#flatness " << f.model << "=" << num(f.ratio) << '\n';
}

Volume make_volume(const RunConfig& c) {
  if (!c.graph.empty()) {
    std::ifstream in(c.graph);
    if (!in) throw UsageError("cannot read graph file " + c.graph);
    try {
      return read_edge_list(in);
    } catch (const std::exception& e) {
      throw UsageError(c.graph + ": " + e.what());
    }
  }
  const bool torus = c.box.empty();
  auto extents = parse_extents(torus ? c.torus : c.box);
  Coord origin(c.origin.begin(), c.origin.end());
  return torus ? Volume::torus(std::move(extents), origin) : Volume::box(std::move(extents), origin);
}

std::string run_persistence(const RunConfig& c, std::ostream& out) {
  const auto scan = persistence_scan(dim_or(c, 1), c.q_list, c.n_traj, mc_options(c), kmc_settings(c));
  std::ostringstream s;
  s << "t,survival,stderr,n\n";
  for (const auto& p : scan.points) {
    s << "#curve q=" << num(p.q) << " L=" << p.side << " rate=" << num(p.fit.rate) << " rate_err=" << num(p.fit.rate_err)
      << " r2=" << num(p.fit.r2) << '\n';
    for (std::size_t i = 0; i < p.curve.times.size(); ++i) {
      s << num(p.curve.times[i]) << ',' << num(p.curve.survival[i]) << ',' << num(p.curve.error[i]) << ','
        << p.curve.n_traj << '\n';
    }
    out << "q=" << num(p.q) << " L=" << p.side << " rate=" << num(p.fit.rate) << " r2=" << num(p.fit.r2) << '\n';
  }
  s << scan_footer(scan.summary);
  print_summary(scan.summary, out);
  return s.str();
}

std::string run_exact(const RunConfig& c, std::ostream& out) {
  const Volume v = make_volume(c);
  const int ell = c.ell.value_or(2);
  std::ostringstream s;
  s << "q,quantity,function,value\n";
  for (double q : c.q_list) {
    for (const auto& row : exact_table(v, q, ell)) {
      s << num(q) << ',' << row.quantity << ',' << row.function << ',' << num(row.value) << '\n';
    }
  }
  s << "#volume " << v.describe() << '\n';
  out << "exact table for " << v.describe() << " (" << c.q_list.size() << " q values)\n";
  return s.str();
}

std::string run_meet(const RunConfig& c, std::ostream& out) {
  if (!c.q_list.empty()) {
    const auto r = meet_scan(c.q_list, c.c);
    print_summary(r, out);
    return scan_csv(r);
  }
  const Volume g = make_volume(c);
  const MeetTable t = solve_meeting_times(g);
  std::ostringstream s;
  s << "x,y,tau\n";
  for (int x = 0; x < t.size(); ++x) {
    for (int y = 0; y < t.size(); ++y) s << x << ',' << y << ',' << num(t.tau(x, y)) << '\n';
  }
  s << "#mean_tau=" << num(t.mean) << '\n';
  out << "#mean_tau=" << num(t.mean) << " residual=" << num(t.residual) << '\n';
  return s.str();
}

std::string run_path(const RunConfig& c, std::ostream& out) {
  std::ostringstream s;
  const std::size_t d = c.z.empty() ? c.cone.size() : c.z.size();
  auto header = [&](const char* first) {
    s << first;
    for (std::size_t i = 0; i < d; ++i) s << ",x" << i;
    s << '\n';
  };
  auto row = [&](std::size_t i, const Coord& x) {
    s << i;
    for (auto v : x) s << ',' << v;
    s << '\n';
  };
  if (!c.z.empty()) {
    const auto p = canonical_path(Coord(c.z.begin(), c.z.end()));
    header("step");
    for (std::size_t i = 0; i < p.steps.size(); ++i) row(i, p.steps[i]);
    out << "canonical path with " << p.steps.size() - 1 << " steps\n";
  } else {
    const auto targets = cone(Coord(c.cone.begin(), c.cone.end()), *c.ell);
    header("index");
    for (std::size_t i = 0; i < targets.size(); ++i) row(i, targets[i]);
    out << "cone with " << targets.size() << " targets\n";
  }
  return s.str();
}

std::string run_body(const RunConfig& c, std::ostream& out) {
  const std::string& sub = c.subcommand;
  if (sub == "gap-scan") {
    const auto r = gap_scan(dim_or(c, 3), c.q_list, c.samples, mc_options(c), c.ell);
    print_summary(r, out);
    return scan_csv(r);
  }
  if (sub == "tau0") {
    const auto r = c.method == "kmc"
                       ? tau0_kmc_scan(dim_or(c, 1), c.q_list, c.n_traj, mc_options(c), kmc_settings(c))
                       : tau0_variational_scan(dim_or(c, 1), c.q_list, c.samples, mc_options(c), c.q0, c.ell);
    print_summary(r, out);
    return scan_csv(r);
  }
  if (sub == "persistence") return run_persistence(c, out);
  if (sub == "exact") return run_exact(c, out);
  if (sub == "meet") return run_meet(c, out);
  return run_path(c, out);
}

}  // namespace

std::optional<RunConfig> parse_config(const std::vector<std::string>& args, std::ostream& out) {
  auto attempt = [&](const std::vector<std::string>& a, RunConfig& c) -> std::unique_ptr<CLI::App> {
    auto app = build_app(c);
    try {
      parse_into(*app, a);
    } catch (const CLI::CallForHelp&) {
      out << app->help();
      return nullptr;
    } catch (const CLI::CallForVersion&) {
      out << FA1F_VERSION << '\n';
      return nullptr;
    } catch (const CLI::ParseError& e) {
      throw UsageError(e.what());
    }
    return app;
  };
  if (args.empty()) throw UsageError("a subcommand is required: gap-scan, persistence, tau0, exact, meet, path");
  RunConfig first;
  auto app = attempt(args, first);
  if (!app) return std::nullopt;
  RunConfig config = first;
  if (!first.config_file.empty()) {
    auto merged = args;
    for (auto& a : config_file_args(first.config_file, *app)) merged.push_back(std::move(a));
    config = RunConfig{};
    if (!attempt(merged, config)) return std::nullopt;
  }
  for (const auto* sub : app->get_subcommands()) config.subcommand = sub->get_name();
  validate(config);
  return config;
}

std::string output_path(const RunConfig& c) {
  if (!c.out.empty()) return c.out;
  const char* dir = std::getenv("FA1F_OUT_DIR");
  const std::string file = c.subcommand + ".csv";
  return dir && *dir ? (std::filesystem::path(dir) / file).string() : file;
}

std::string describe(const RunConfig& c) {
  std::ostringstream s;
  s << "subcommand=" << c.subcommand << " q_list=" << join(c.q_list) << " dim=" << c.dim << " seed=" << c.seed;
  if (c.subcommand == "gap-scan" || c.subcommand == "tau0") s << " samples=" << c.samples;
  if (c.subcommand == "persistence" || c.subcommand == "tau0") s << " n_traj=" << c.n_traj;
  if (c.subcommand == "tau0") s << " method=" << c.method;
  s << " q0=" << num(c.q0);
  if (c.subcommand == "meet") s << " c=" << num(c.c);
  if (c.ell) s << " ell=" << *c.ell;
  if (c.side) s << " side=" << *c.side;
  if (c.t_max) s << " t_max=" << num(*c.t_max);
  if (!c.box.empty()) s << " box=" << c.box;
  if (!c.torus.empty()) s << " torus=" << c.torus;
  if (!c.graph.empty()) s << " graph=" << std::filesystem::path(c.graph).filename().string();
  if (!c.origin.empty()) s << " origin=" << join(c.origin);
  if (!c.z.empty()) s << " z=" << join(c.z);
  if (!c.cone.empty()) s << " cone=" << join(c.cone);
  return s.str();
}

void run(const RunConfig& c, std::ostream& out) {
  const std::string body = run_body(c, out);
  // Thread count and output path are left out: they do not change the bytes.
  const std::string meta = "#meta version=" FA1F_VERSION " " + describe(c) + "\n";
  const std::string path = output_path(c);
  write_atomic(path, meta + body);
  out << "wrote " << path << '\n';
}

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    const auto config = parse_config(args, out);
    if (!config) return 0;
    run(*config, out);
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nrun 'fa1f --help' for the list of subcommands and flags\n";
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return 1;
  } catch (const PreconditionError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return 1;
  } catch (const StructuralError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return 1;
  } catch (const ResourceError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "output error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace fa1f::cli
