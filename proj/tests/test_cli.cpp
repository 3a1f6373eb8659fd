#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using fa1f::cli::run_main;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() : dir(fs::temp_directory_path() / ("fa1f_cli_test_" + std::to_string(::getpid()))) {
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string file(const std::string& name) const { return (dir / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir / name) << text; }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(std::vector<std::string> args) {
  std::ostringstream out, err;
  return run_main(args, out, err);
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  CHECK(run({}) == 1);
  CHECK(run({"no-such-command"}) == 1);
  CHECK(run({"gap-scan"}) == 1);
  CHECK(run({"gap-scan", "--q-list", "1.5"}) == 1);
  CHECK(run({"gap-scan", "--q-list", "0.1,0.2"}) == 1);
  CHECK(run({"gap-scan", "--q-list", "0.2,0.1", "--samples", "99"}) == 1);
  CHECK(run({"tau0", "--q-list", "0.2", "--method", "magic"}) == 1);
  CHECK(run({"exact", "--q-list", "0.2"}) == 1);
  CHECK(run({"path", "--cone", "1,1"}) == 1);
  CHECK(run({"meet", "--torus", "4y4"}) == 1);
}

TEST_CASE("help and version exit with code 0") {
  CHECK(run({"--help"}) == 0);
  CHECK(run({"--version"}) == 0);
}

TEST_CASE("config file: unknown keys are rejected, flags win") {
  Scratch s;
  s.write("bad.cfg", "q-list = 0.2,0.1\nsamplez = 10\n");
  CHECK(run({"tau0", "--config", s.file("bad.cfg")}) == 1);
  CHECK(run({"tau0", "--config", s.file("missing.cfg")}) == 1);

  s.write("good.cfg", "# scan\nq_list = 0.3,0.2\ndim = 1\nsamples = 150\nseed = 9\n");
  std::ostringstream out;
  auto c = fa1f::cli::parse_config({"tau0", "--config", s.file("good.cfg"), "--samples", "400"}, out);
  REQUIRE(c);
  CHECK(c->samples == 400);
  CHECK(c->seed == 9);
  CHECK(c->dim == 1);
  CHECK(c->q_list == std::vector<double>{0.3, 0.2});
  CHECK(c->subcommand == "tau0");
}

TEST_CASE("identical config and seed give identical bytes for any thread count") {
  Scratch s;
  const std::vector<std::string> base{"gap-scan", "--dim", "2", "--q-list", "0.3,0.2,0.15", "--samples", "3000"};
  auto with = [&](const std::string& out, const std::string& threads) {
    auto a = base;
    a.insert(a.end(), {"--out", s.file(out), "--threads", threads});
    return run(a);
  };
  REQUIRE(with("a.csv", "1") == 0);
  REQUIRE(with("b.csv", "1") == 0);
  REQUIRE(with("c.csv", "3") == 0);
  const auto a = slurp(s.file("a.csv"));
  CHECK(a == slurp(s.file("b.csv")));
  CHECK(a == slurp(s.file("c.csv")));
  CHECK(a.rfind("#meta version=", 0) == 0);
  CHECK(a.find("\nq,value,stderr,n,label\n") != std::string::npos);
  CHECK(a.find("#fit slope=") != std::string::npos);
  CHECK(a.find("q^2/log(1/q)") != std::string::npos);
  CHECK_FALSE(fs::exists(s.file("a.csv.tmp")));

  auto other = base;
  other.insert(other.end(), {"--out", s.file("d.csv"), "--seed", "2"});
  REQUIRE(run(other) == 0);
  CHECK(a != slurp(s.file("d.csv")));
}

TEST_CASE("output formats") {
  Scratch s;
  REQUIRE(run({"persistence", "--q-list", "0.3", "--n-traj", "200", "--out", s.file("p.csv")}) == 0);
  CHECK(slurp(s.file("p.csv")).find("\nt,survival,stderr,n\n") != std::string::npos);

  REQUIRE(run({"meet", "--torus", "4x4", "--out", s.file("m.csv")}) == 0);
  const auto m = slurp(s.file("m.csv"));
  CHECK(m.find("\nx,y,tau\n") != std::string::npos);
  CHECK(m.find("#mean_tau=") != std::string::npos);

  s.write("p3.txt", "3 2\n0 1\n1 2\n");
  REQUIRE(run({"meet", "--graph", s.file("p3.txt"), "--out", s.file("p3.csv")}) == 0);
  CHECK(slurp(s.file("p3.csv")).find("\n0,2,0.5\n") != std::string::npos);

  REQUIRE(run({"path", "--z", "2,1", "--out", s.file("path.csv")}) == 0);
  CHECK(slurp(s.file("path.csv")).find("step,x0,x1\n0,0,0\n") != std::string::npos);

  REQUIRE(run({"exact", "--torus", "4", "--q-list", "0.3", "--out", s.file("e.csv")}) == 0);
  const auto e = slurp(s.file("e.csv"));
  CHECK(e.find("0.3,gap,-,") != std::string::npos);
  CHECK(e.find("0.3,expected_tau0,-,") != std::string::npos);
}

TEST_CASE("default output directory comes from the environment") {
  Scratch s;
  ::setenv("FA1F_OUT_DIR", s.dir.c_str(), 1);
  CHECK(run({"path", "--z", "1,1"}) == 0);
  ::unsetenv("FA1F_OUT_DIR");
  CHECK(fs::exists(s.file("path.csv")));
}
