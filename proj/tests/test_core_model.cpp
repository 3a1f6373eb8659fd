#include <sstream>
#include <map>

#include "doctest.h"
#include "oracles.hpp"

#include "fa1f/core_model.hpp"
#include "fa1f/errors.hpp"

using namespace fa1f;

TEST_CASE("parameters reject values outside their ranges") {
  CHECK_NOTHROW((Parameters{0.1, 2, 0.5, 3}.validate()));
  CHECK_THROWS_AS((Parameters{1.5, 1, 0.5, 1}.validate()), DomainError);
  CHECK_THROWS_AS((Parameters{0.1, 0, 0.5, 1}.validate()), DomainError);
  CHECK_THROWS_AS((Parameters{0.1, 1, 1.0, 1}.validate()), DomainError);
  CHECK_THROWS_AS((Parameters{0.1, 1, 0.5, 0}.validate()), DomainError);
}

TEST_CASE("constraint on a filled-boundary box") {
  const Volume box = Volume::box({3, 3});
  Configuration eta(9);
  SUBCASE("all neighbours occupied") { CHECK_FALSE(constraint(box, eta, 4)); }
  SUBCASE("one empty neighbour") {
    eta.set(1, 0);
    CHECK(constraint(box, eta, 4));
    CHECK(constraint(box, eta, 0));
    CHECK_FALSE(constraint(box, eta, 8));
  }
  SUBCASE("corner only sees in-box neighbours") {
    eta.set(4, 0);
    CHECK_FALSE(constraint(box, eta, 0));
  }
  CHECK_THROWS_AS(constraint(box, eta, 9), std::out_of_range);
  CHECK_THROWS_AS(constraint(box, eta, -1), std::out_of_range);
}

TEST_CASE("volume adjacency is symmetric and loop free") {
  for (const Volume& v : {Volume::box({4, 3}), Volume::torus({4, 4}), Volume::torus({2}), Volume::torus({1, 3}),
                          Volume::box({2, 2, 2})}) {
    for (int s = 0; s < v.size(); ++s) {
      for (int t : v.neighbors(s)) {
        CHECK(t != s);
        const auto back = v.neighbors(t);
        CHECK(std::find(back.begin(), back.end(), s) != back.end());
      }
    }
  }
  CHECK(Volume::torus({4}).degree(0) == 2);
  CHECK(Volume::torus({2}).degree(0) == 1);  // both directions reach the same site
  CHECK(Volume::box({3}).degree(0) == 1);
  const std::pair<int, int> loop[] = {{0, 0}};
  CHECK_THROWS_AS(Volume::graph(2, loop), DomainError);
}

TEST_CASE("row-major indexing and origins") {
  const Volume t = Volume::torus({3, 4}, {1, 2});
  CHECK(t.origin() == 1 * 4 + 2);
  CHECK(t.coords(7) == Coord{1, 3});
  CHECK(*t.site_at({-1, 5}) == 2 * 4 + 1);
  CHECK(*t.relative_site({0, 2}) == 1 * 4 + 0);
  const Volume b = Volume::box({3, 3}, {1, 1});
  CHECK_FALSE(b.relative_site({2, 0}).has_value());
  CHECK_THROWS_AS(Volume::box({3}, {3}), DomainError);
}

TEST_CASE("critical length") {
  CHECK(critical_length(0.3, 0.3, 1) == 1);
  CHECK(critical_length(0.1, 0.5, 2) == 3);
  CHECK(critical_length(0.1, 0.5, 1) == 7);  // log 2 / -log 0.9 = 6.58
  int prev = critical_length(0.9, 0.5, 2);
  for (double q = 0.85; q > 0.005; q -= 0.01) {
    const int l = critical_length(q, 0.5, 2);
    CHECK(l >= prev);
    prev = l;
  }
  CHECK_THROWS_AS(critical_length(0.0, 0.5, 1), DomainError);
  CHECK_THROWS_AS(critical_length(0.5, 1.0, 1), DomainError);
}

TEST_CASE("flip is an involution changing one bit") {
  const Configuration eta = Configuration::from_string("10110");
  for (int x = 0; x < eta.size(); ++x) {
    const Configuration f = flip(eta, x);
    CHECK(flip(f, x) == eta);
    int diff = 0;
    for (int i = 0; i < eta.size(); ++i) diff += eta[i] != f[i];
    CHECK(diff == 1);
  }
  const Configuration full(4);
  CHECK(flip(full, 0).to_string() == "0111");
  CHECK_THROWS_AS(flip(eta, 5), std::out_of_range);
}

TEST_CASE("constraint depends only on neighbours") {
  const Volume v = Volume::torus({4, 4, 4});
  Rng rng = make_stream(11, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const Configuration eta = sample_config(v, 0.3, rng);
    const int x = static_cast<int>(rng() % 64);
    const auto nb = v.neighbors(x);
    for (int y = 0; y < v.size(); ++y) {
      if (y == x || std::find(nb.begin(), nb.end(), y) != nb.end()) continue;
      CHECK(constraint(v, flip(eta, y), x) == constraint(v, eta, x));
    }
  }
}

TEST_CASE("product sampling") {
  const Volume v = Volume::torus({100000});
  Rng rng = make_stream(3, 0);
  CHECK(sample_config(Volume::box({50}), 0.0, rng).vacancies() == 0);
  CHECK(sample_config(Volume::box({50}), 1.0, rng).vacancies() == 50);
  const double q = 0.27;
  const double frac = sample_config(v, q, rng).vacancies() / 1e5;
  CHECK(std::abs(frac - q) < 3.0 * std::sqrt(q * (1 - q) / 1e5));
}

TEST_CASE("conditioned sampling matches the enumerated conditioned law") {
  SUBCASE("two-site graph at q = 1/2") {
    const std::pair<int, int> e[] = {{0, 1}};
    const Volume g = Volume::graph(2, e);
    Rng rng = make_stream(5, 0);
    std::map<std::string, double> counts;
    const int n = 30000;
    for (int i = 0; i < n; ++i) counts[sample_config_conditioned(g, 0.5, rng).to_string()] += 1;
    CHECK(counts.count("11") == 0);
    for (const char* s : {"00", "01", "10"}) {
      const double p = 1.0 / 3.0;
      CHECK(std::abs(counts[s] / n - p) < 3.0 * std::sqrt(p * (1 - p) / n));
    }
  }
  SUBCASE("graphs up to ten vertices") {
    Rng pick = make_stream(17, 1);
    for (int n : {3, 6, 10}) {
      std::vector<std::pair<int, int>> edges;
      for (int i = 1; i < n; ++i) edges.emplace_back(static_cast<int>(pick() % i), i);
      const Volume g = Volume::graph(n, edges);
      for (double q : {0.2, 0.5}) {
        const auto law = oracle::enumerate(g, q, true);
        std::map<std::uint64_t, double> expected;
        for (std::size_t i = 0; i < law.states.size(); ++i) expected[law.states[i].to_index()] = law.weights[i];
        const int draws = 200000;
        std::map<std::uint64_t, double> seen;
        Rng rng = make_stream(23, static_cast<std::uint64_t>(n * 10 + q * 10));
        for (int i = 0; i < draws; ++i) seen[sample_config_conditioned(g, q, rng).to_index()] += 1;
        // Pool sparse cells so the chi-square approximation holds.
        std::vector<double> obs, exp;
        double pooled_o = 0, pooled_e = 0;
        for (auto [code, p] : expected) {
          if (p * draws >= 5) obs.push_back(seen[code]), exp.push_back(p * draws);
          else pooled_o += seen[code], pooled_e += p * draws;
        }
        if (pooled_e > 0) obs.push_back(pooled_o), exp.push_back(pooled_e);
        CHECK(oracle::chi_square_ok(obs, exp));
      }
    }
  }
  SUBCASE("tiny q exercises the exact fallback") {
    const Volume g = Volume::box({3});
    Rng rng = make_stream(9, 0);
    const double q = 1e-6;
    std::map<std::string, double> counts;
    const int n = 3000;
    for (int i = 0; i < n; ++i) {
      const Configuration c = sample_config_conditioned(g, q, rng);
      CHECK(c.vacancies() >= 1);
      counts[c.to_string()] += 1;
    }
    // Single vacancies are almost surely uniform over the three sites.
    for (const char* s : {"011", "101", "110"}) CHECK(std::abs(counts[s] / n - 1.0 / 3.0) < 0.04);
  }
  Rng rng = make_stream(1, 0);
  CHECK(sample_config_conditioned(Volume::box({4}), 1.0, rng).vacancies() == 4);
}

TEST_CASE("edge list and configuration dumps") {
  std::istringstream in("3 2\n0 1\n1 2\n");
  const Volume g = read_edge_list(in);
  CHECK(g.size() == 3);
  CHECK(g.degree(1) == 2);
  std::istringstream bad("3 2\n0 1\n");
  CHECK_THROWS_AS(read_edge_list(bad), DomainError);
  std::istringstream range("2 1\n0 5\n");
  CHECK_THROWS(read_edge_list(range));

  std::stringstream io;
  const Configuration c = Configuration::from_string("0110");
  write_config(io, c);
  CHECK(read_config(io) == c);
  CHECK_THROWS_AS(Configuration::from_string("01x"), DomainError);
  CHECK(Configuration::from_index(4, 0b0110).to_string() == "0110");
  CHECK(c.to_index() == 0b0110);
}
