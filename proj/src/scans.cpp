#include "fa1f/scans.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "fa1f/errors.hpp"
#include "fa1f/exact.hpp"
#include "fa1f/parallel.hpp"
#include "fa1f/testfn.hpp"

namespace fa1f {

namespace {

void check_q_list(std::span<const double> qs) {
  if (qs.empty()) throw DomainError("q list is empty");
  for (std::size_t i = 0; i < qs.size(); ++i) {
    if (!(qs[i] > 0.0 && qs[i] < 1.0)) throw DomainError("q values must lie in (0,1)");
    if (i > 0 && !(qs[i] < qs[i - 1])) throw DomainError("q values must strictly decrease");
  }
}

Estimate scaled_estimate(const Estimate& e, double c) { return {c * e.mean, std::abs(c) * e.error, e.n}; }

double log_model(double q) { return q * q / std::log(1.0 / q); }

void add_fit(ScanResult& r, const std::string& label) {
  auto pts = series(r, label);
  r.fit_label = label;
  if (pts.size() >= 3) r.fit = fit_exponent(pts);
}

void add_flatness(ScanResult& r, const std::string& label, const std::string& model_name,
                  const std::function<double(double)>& model) {
  const auto pts = series(r, label);
  if (pts.size() >= 2) r.flatness.push_back({label + ":" + model_name, flatness(pts, model)});
}

// Flatness against both log-corrected models, whichever direction the series runs.
void add_log_flatness(ScanResult& r, const std::string& label) {
  add_flatness(r, label, "q^2/log(1/q)", log_model);
  add_flatness(r, label, "q^-2*log(1/q)", [](double q) { return 1.0 / log_model(q); });
}

Volume lattice_box(int d, int side, int origin) {
  return Volume::box(std::vector<int>(static_cast<std::size_t>(d), side),
                     Coord(static_cast<std::size_t>(d), origin));
}

}  // namespace

std::vector<ScalingPoint> series(const ScanResult& r, const std::string& label) {
  std::vector<ScalingPoint> pts;
  for (const auto& row : r.rows) {
    if (row.label == label && row.value.mean > 0.0) pts.push_back({row.q, row.value.mean, log_weight(row.value)});
  }
  return pts;
}

int gap_scan_side(double q, std::optional<int> ell) {
  if (ell) {
    if (*ell < 1) throw DomainError("window side must be positive");
    return *ell;
  }
  return std::max(1, static_cast<int>(std::floor(1.0 / q * (1.0 + 1e-12))));
}

ScanResult gap_scan(int d, std::span<const double> qs, std::size_t samples, const McOptions& opts,
                    std::optional<int> ell) {
  check_q_list(qs);
  if (d < 1) throw DomainError("dimension must be at least 1");
  ScanResult r;
  for (std::size_t k = 0; k < qs.size(); ++k) {
    const double q = qs[k];
    const int l = gap_scan_side(q, ell);
    const Volume box = lattice_box(d, l + 2, 1);
    const TestFunction f = make_cluster_count(box, l);
    McOptions o = opts;
    o.seed = opts.seed + 0x9e3779b97f4a7c15ull * (k + 1);
    const auto s = collect_samples(f, product_sampler(box, q), samples, o, &box, q);
    const double scale = q * (1.0 - q);
    const Estimate var = variance_of(s.f);
    const Estimate g = mean_of(s.g);
    const Estimate dir = scaled_estimate(g, scale);
    const Estimate bound = mean_over_variance(s.g, s.f, scale);
    r.rows.push_back({q, bound, "gap_bound"});
    r.rows.push_back({q, var, "variance"});
    r.rows.push_back({q, dir, "dirichlet"});
    r.rows.push_back({q, scaled_estimate(var, 1.0 / (q * std::pow(l, d))), "variance_scaled"});
    r.rows.push_back({q, scaled_estimate(dir, std::pow(q, d - 3)), "dirichlet_scaled"});
    r.notes.push_back("q=" + std::to_string(q) + " ell=" + std::to_string(l) + " volume=" + box.describe());
  }
  add_fit(r, "gap_bound");
  add_flatness(r, "variance_scaled", "1", [](double) { return 1.0; });
  add_flatness(r, "dirichlet_scaled", "1", [](double) { return 1.0; });
  add_log_flatness(r, "gap_bound");
  return r;
}

ScanResult tau0_variational_scan(int d, std::span<const double> qs, std::size_t samples, const McOptions& opts,
                                 double q0, std::optional<int> ell) {
  check_q_list(qs);
  if (d < 1) throw DomainError("dimension must be at least 1");
  ScanResult r;
  for (std::size_t k = 0; k < qs.size(); ++k) {
    const double q = qs[k];
    McOptions o = opts;
    o.seed = opts.seed + 0x9e3779b97f4a7c15ull * (k + 1);
    Volume v = lattice_box(d, 3, 1);
    TestFunction f;
    int l = 1;
    if (d == 1) {
      l = ell ? *ell : static_cast<int>(std::ceil(1.0 / q * (1.0 - 1e-12)));
      v = lattice_box(1, 4 * l + 1, 2 * l);
      f = make_f_one_d(v, l);
    } else if (d == 2) {
      l = ell ? *ell : critical_length(q, q0, 2);
      v = lattice_box(2, 2 * l + 3, l + 1);
      f = make_f_two_d(v, l);
    } else {
      f = make_f_origin(v);
    }
    const Estimate b = tau0_lower_bound(f, v, q, product_sampler(v, q), samples, o);
    r.rows.push_back({q, b, "tau0_bound"});
    r.notes.push_back("q=" + std::to_string(q) + " f=" + f.label + " ell=" + std::to_string(l) +
                      " volume=" + v.describe());
  }
  add_fit(r, "tau0_bound");
  add_log_flatness(r, "tau0_bound");
  return r;
}

namespace {

int torus_side(int d, double q, const KmcSettings& s) {
  if (s.side) {
    if (*s.side < 2) throw DomainError("torus side must be at least 2");
    return *s.side;
  }
  return default_torus_side(q, s.q0, d);
}

Volume torus(int d, int side) {
  return Volume::torus(std::vector<int>(static_cast<std::size_t>(d), side),
                       Coord(static_cast<std::size_t>(d), side / 2));
}

}  // namespace

ScanResult tau0_kmc_scan(int d, std::span<const double> qs, std::size_t runs, const McOptions& opts,
                         const KmcSettings& settings) {
  check_q_list(qs);
  ScanResult r;
  for (std::size_t k = 0; k < qs.size(); ++k) {
    const double q = qs[k];
    const int side = torus_side(d, q, settings);
    const Volume v = torus(d, side);
    const double t_max = settings.t_max ? *settings.t_max : default_t_max(q, d);
    McOptions o = opts;
    o.seed = opts.seed + 0x9e3779b97f4a7c15ull * (k + 1);
    const Tau0Summary s = sample_tau0(v, q, runs, t_max, false, o);
    for (const auto& run : s.samples) {
      const char* label = run.frozen ? "frozen" : run.censored ? "censored" : "run";
      r.rows.push_back({q, {run.time, 0.0, 1}, label});
    }
    r.rows.push_back({q, s.mean, "tau0_mean"});
    r.notes.push_back("q=" + std::to_string(q) + " L=" + std::to_string(side) + " t_max=" + std::to_string(t_max) +
                      " runs=" + std::to_string(runs) + " frozen=" + std::to_string(s.frozen) +
                      " censored=" + std::to_string(s.censored));
  }
  add_fit(r, "tau0_mean");
  add_log_flatness(r, "tau0_mean");
  return r;
}

PersistenceCurve survival_from_samples(std::span<const Tau0Sample> samples, std::span<const double> grid) {
  PersistenceCurve c;
  c.times.assign(grid.begin(), grid.end());
  c.n_traj = samples.size();
  const double n = static_cast<double>(samples.size());
  std::vector<double> times;
  times.reserve(samples.size());
  for (const auto& s : samples) {
    c.frozen += s.frozen;
    times.push_back(s.censored ? std::numeric_limits<double>::infinity() : s.time);
  }
  std::sort(times.begin(), times.end());
  for (double t : grid) {
    const auto alive = static_cast<double>(times.end() - std::upper_bound(times.begin(), times.end(), t));
    const double f = alive / n;
    c.survival.push_back(f);
    c.error.push_back(std::sqrt(f * (1.0 - f) / n));
  }
  return c;
}

std::vector<double> survival_grid(std::span<const Tau0Sample> samples, std::size_t points, double floor) {
  std::vector<double> times;
  double t_cap = 0.0;
  for (const auto& s : samples) {
    if (!s.censored) times.push_back(s.time);
    else t_cap = std::max(t_cap, s.time);
  }
  std::sort(times.begin(), times.end());
  const double n = static_cast<double>(samples.size());
  // Smallest sample time after which the survival fraction is below floor.
  double end = t_cap;
  const auto need = static_cast<std::size_t>(std::ceil((1.0 - floor) * n));
  if (need >= 1 && need <= times.size()) end = times[need - 1];
  if (!(end > 0.0)) end = times.empty() ? 1.0 : std::max(times.back(), 1e-9);
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) grid[i] = end * static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

PersistenceScan persistence_scan(int d, std::span<const double> qs, std::size_t runs, const McOptions& opts,
                                 const KmcSettings& settings) {
  check_q_list(qs);
  if (runs < 100) throw DomainError("persistence needs at least 100 trajectories");
  PersistenceScan out;
  for (std::size_t k = 0; k < qs.size(); ++k) {
    const double q = qs[k];
    const int side = torus_side(d, q, settings);
    const Volume v = torus(d, side);
    const double t_max = settings.t_max ? *settings.t_max : default_t_max(q, d);
    std::vector<Tau0Sample> samples(runs);
    const std::uint64_t seed = opts.seed + 0x9e3779b97f4a7c15ull * (k + 1);
    parallel_for(runs, opts.threads, [&](std::size_t i) {
      Rng rng = make_stream(seed, i);
      // Start from mu_G: an all-occupied torus is frozen forever, which has no
      // infinite-volume counterpart and would pin a plateau into the curve.
      samples[i] = simulate_tau0(v, q, rng, t_max, true);
    });
    const auto grid = survival_grid(samples, 60, 0.005);
    PersistenceScanPoint p{q, side, survival_from_samples(samples, grid), {}};
    std::string note = "q=" + std::to_string(q) + " L=" + std::to_string(side) + " frozen=" +
                       std::to_string(p.curve.frozen) + " t_end=" + std::to_string(grid.back());
    try {
      p.fit = persistence_rate_fit(p.curve);
      out.summary.rows.push_back({q, {p.fit.rate, p.fit.rate_err, runs}, "decay_rate"});
      out.summary.rows.push_back({q, {p.fit.r2, 0.0, runs}, "fit_r2"});
    } catch (const NumericalError& e) {
      note += std::string(" fit_failed: ") + e.what();
    }
    out.summary.notes.push_back(note);
    out.points.push_back(std::move(p));
  }
  add_fit(out.summary, "decay_rate");
  add_log_flatness(out.summary, "decay_rate");
  return out;
}

ScanResult meet_scan(std::span<const double> qs, double c) {
  check_q_list(qs);
  ScanResult r;
  for (double q : qs) {
    const int side = std::max(2, static_cast<int>(std::ceil(c / std::sqrt(q) * (1.0 - 1e-12))));
    const Volume t = Volume::torus({side, side});
    const MeetTable table = solve_meeting_times(t);
    const double lb = meet_lower_bound(t);
    const std::size_t n = static_cast<std::size_t>(t.size());
    r.rows.push_back({q, {table.mean, 0.0, n}, "mean_tau"});
    r.rows.push_back({q, {lb, 0.0, n}, "log_bound"});
    r.rows.push_back({q, {q / table.mean, 0.0, n}, "q_over_meet"});
    r.notes.push_back("q=" + std::to_string(q) + " L=" + std::to_string(side) +
                      " residual=" + std::to_string(table.residual));
  }
  add_fit(r, "q_over_meet");
  add_log_flatness(r, "q_over_meet");
  return r;
}

std::vector<ExactRow> exact_table(const Volume& volume, double q, int ell) {
  std::vector<ExactRow> rows;
  const Generator gen = build_generator(volume, q, true);
  double gap = -1.0;
  if (gen.space.count() <= kMaxDenseStates) {
    gap = exact_gap(gen);
    rows.push_back({"gap", "-", gap});
  }
  const double tau = exact_expected_tau0(volume, q);
  rows.push_back({"expected_tau0", "-", tau});
  std::vector<TestFunction> fs{make_f_origin(volume)};
  if (volume.kind() != VolumeKind::graph) {
    auto try_add = [&](auto&& make) {
      try {
        fs.push_back(make());
      } catch (const DomainError&) {
      }
    };
    try_add([&] { return make_cluster_count(volume, ell); });
    try_add([&] { return make_chi_ell(volume, ell); });
    if (volume.dim() == 1) try_add([&] { return make_f_one_d(volume, ell); });
    if (volume.dim() == 2) try_add([&] { return make_f_two_d(volume, ell); });
  }
  for (const auto& f : fs) {
    const auto m = exact_moments(f, gen.space);
    rows.push_back({"mean", f.label, m.mean});
    rows.push_back({"variance", f.label, m.variance});
    rows.push_back({"dirichlet", f.label, m.dirichlet});
    if (m.variance > 0.0) rows.push_back({"gap_bound", f.label, m.dirichlet / m.variance});
    if (m.dirichlet > 0.0 && f.label != "chi_ell" && f.label != "cluster_count") {
      rows.push_back({"tau0_bound", f.label, m.mean * m.mean / m.dirichlet});
    }
  }
  return rows;
}

}  // namespace fa1f
