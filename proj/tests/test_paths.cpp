#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "doctest.h"

#include "fa1f/errors.hpp"
#include "fa1f/paths.hpp"
#include "path_checks.hpp"

using namespace fa1f;

using path_checks::orthant;

TEST_CASE("canonical path examples") {
  CHECK(canonical_path({3, 0}).steps == std::vector<Coord>{{0, 0}, {1, 0}, {2, 0}, {3, 0}});
  CHECK(canonical_path({2, 1}).steps == std::vector<Coord>{{0, 0}, {1, 0}, {2, 0}, {2, 1}});
  CHECK(canonical_path({-2, 1}).steps == std::vector<Coord>{{0, 0}, {-1, 0}, {-2, 0}, {-2, 1}});
  const auto p = canonical_path({2, 1});
  CHECK(p.witnesses == std::vector<Witness>{{{1, 2}, 0}, {{1, 1}, 0}, {{1, 1}, 1}});
  CHECK_THROWS_AS(canonical_path({0, 0}), DomainError);
}

TEST_CASE("canonical path invariants for |z| <= 30, d <= 3") {
  for (int d = 1; d <= 3; ++d) {
    const int max_norm = d == 3 ? 18 : 30;
    for (Coord z : orthant(d, max_norm)) {
      // Include reflected targets for the sign handling.
      for (int mask = 0; mask < (1 << d); ++mask) {
        Coord t = z;
        bool skip = false;
        for (int a = 0; a < d; ++a) {
          if (mask >> a & 1) {
            if (t[a] == 0) skip = true;
            t[a] = -t[a];
          }
        }
        if (skip) continue;
        const auto p = canonical_path(t);
        REQUIRE(p.steps.size() == static_cast<std::size_t>(l1_norm(t)) + 1);
        CHECK(p.steps.back() == t);
        for (std::size_t i = 0; i < p.steps.size(); ++i) CHECK(l1_norm(p.steps[i]) == static_cast<int>(i));
        for (std::size_t i = 1; i < p.witnesses.size(); ++i) CHECK(p.witnesses[i - 1] < p.witnesses[i]);
      }
    }
  }
}

TEST_CASE("floor_alpha") {
  const double y[] = {1.5, 2.0};
  CHECK(floor_alpha(y, 0) == Coord{1, 1});
  CHECK(floor_alpha(y, 1) == Coord{1, 2});
  SUBCASE("reproduces the canonical path in d = 2, 3 for positive targets") {
    for (int d = 2; d <= 3; ++d) {
      for (const Coord& z : orthant(d, 20)) {
        if (std::find(z.begin(), z.end(), 0) != z.end()) continue;
        const auto p = canonical_path(z);
        for (std::size_t i = 0; i < p.witnesses.size(); ++i) {
          const auto& w = p.witnesses[i];
          CHECK(floor_alpha(scale(w.s, z), w.axis) == p.steps[i + 1]);
        }
      }
    }
  }
}

TEST_CASE("floor_alpha on targets with a zero coordinate") {
  // A zero coordinate after the witness axis gives ceil(0) - 1 = -1, so the
  // representation needs strictly positive targets; restricted to the nonzero
  // axes it holds again.
  const Coord z{2, 0};
  const auto p = canonical_path(z);
  CHECK(floor_alpha(scale(p.witnesses[0].s, z), 0) == Coord{1, -1});
  CHECK(p.steps[1] == Coord{1, 0});
  for (const Coord& w : orthant(3, 14)) {
    Coord reduced;
    for (int x : w)
      if (x != 0) reduced.push_back(x);
    const auto full = canonical_path(w);
    const auto red = canonical_path(reduced);
    for (std::size_t i = 0; i < red.witnesses.size(); ++i) {
      const auto& wt = red.witnesses[i];
      CHECK(floor_alpha(scale(wt.s, reduced), wt.axis) == red.steps[i + 1]);
      CHECK(l1_norm(full.steps[i + 1]) == l1_norm(red.steps[i + 1]));
    }
  }
}

TEST_CASE("cone examples and domain") {
  auto as_set = [](const std::vector<Coord>& v) { return std::set<Coord>(v.begin(), v.end()); };
  CHECK(as_set(cone({0, 0}, 1)) == std::set<Coord>{{1, 0}, {0, 1}});
  CHECK(as_set(cone({1, 0}, 2)) == std::set<Coord>{{2, 0}, {1, 1}});
  CHECK_THROWS_AS(cone({2, 1}, 2), DomainError);
  CHECK_THROWS_AS(cone({-1, 0}, 2), DomainError);
}

TEST_CASE("cones at a fixed level partition the shell above it") {
  for (int d = 2; d <= 3; ++d) {
    const int ell = d == 2 ? 12 : 7;
    for (int m = 0; m <= ell; ++m) {
      std::map<Coord, int> hits;
      for (const Coord& y : orthant(d, m)) {
        if (l1_norm(y) != m) continue;
        for (const Coord& z : cone(y, ell)) ++hits[z];
      }
      if (m == 0) {
        for (const Coord& z : cone(Coord(static_cast<std::size_t>(d), 0), ell)) ++hits[z];
      }
      std::size_t expected = 0;
      for (const Coord& z : orthant(d, ell)) {
        if (l1_norm(z) > m) {
          ++expected;
          CHECK(hits[z] == 1);
        }
      }
      CHECK(hits.size() == expected);
    }
  }
}

TEST_CASE("cone size bound holds away from the apex") {
  // |C_y| <= ell^d / (|y|^(d-1) + 1). At y = 0 the cone is the whole orthant
  // ball, which exceeds the bound for ell <= 2; see the dedicated case below.
  for (int d = 2; d <= 3; ++d) {
    for (int ell = 1; ell <= 12; ++ell) {
      for (const Coord& y : orthant(d, ell)) {
        const double bound = std::pow(ell, d) / (std::pow(l1_norm(y), d - 1) + 1.0);
        CHECK(static_cast<double>(cone(y, ell).size()) <= bound);
      }
    }
  }
}

TEST_CASE("cone size bound fails at the apex for ell <= 2") {
  CHECK(cone({0, 0}, 1).size() == 2);  // bound 1
  CHECK(cone({0, 0}, 2).size() == 5);  // bound 4
  CHECK(cone({0, 0, 0}, 1).size() == 3);
  CHECK(cone({0, 0, 0}, 2).size() == 9);
  CHECK(cone({0, 0}, 3).size() <= 9);
}

TEST_CASE("configuration path examples") {
  const Volume line = Volume::box({7}, {2});
  SUBCASE("empty origin gives no steps") {
    const auto p = config_path(line, Configuration::from_string("1101111"), 3);
    CHECK(p.steps.empty());
  }
  SUBCASE("single vacancy at distance two") {
    const auto p = config_path(line, Configuration::from_string("1111011"), 3);
    REQUIRE(p.steps.size() == 3);
    CHECK(p.steps[0].displacement == Coord{1});
    CHECK(p.steps[1].displacement == Coord{2});
    CHECK(p.steps[2].displacement == Coord{0});
    CHECK(p.steps.back().after.empty_at(line.origin()));
  }
  CHECK_THROWS_AS(config_path(line, Configuration::from_string("1111110"), 3), PreconditionError);
}

namespace {

// Length bound as tested: 2 ell in d = 1, 2 d ell otherwise.
path_checks::PathFacts check_path(const Volume& v, const Configuration& eta, int ell) {
  auto f = path_checks::check_path(v, eta, ell);
  f.within_2dell = v.dim() == 1 ? f.within_2ell : f.within_2dell;
  return f;
}

}  // namespace

TEST_CASE("configuration path properties on random 5x5 configurations") {
  const Volume box = Volume::box({5, 5});
  Rng rng = make_stream(41, 0);
  int checked = 0;
  while (checked < 500) {
    const Configuration eta = sample_config(box, 0.15, rng);
    if (eta.vacancies() == 0) continue;
    ++checked;
    const auto f = check_path(box, eta, 5);
    CHECK(f.allowed);
    CHECK(f.ends_empty);
    CHECK(f.within_2dell);
    CHECK(f.on_path);
    CHECK(f.twice_at_most);
    CHECK(f.vacancies_bounded);
  }
}

TEST_CASE("configuration path properties hold exhaustively on small boxes") {
  for (const auto& [v, ell] : {std::pair{Volume::box({4, 4}), 4}, std::pair{Volume::box({8}), 8},
                               std::pair{Volume::box({3, 3, 2}), 2}}) {
    for (std::uint64_t code = 0; code + 1 < (std::uint64_t{1} << v.size()); ++code) {
      const Configuration eta = Configuration::from_index(v.size(), code);
      bool any = false;
      for (const Coord& x : box_displacements(v.dim(), ell)) any = any || eta.empty_at(*v.relative_site(x));
      if (!any) continue;
      const auto f = check_path(v, eta, ell);
      CHECK(f.allowed);
      CHECK(f.ends_empty);
      CHECK(f.within_2dell);
      CHECK(f.on_path);
      CHECK(f.twice_at_most);
      CHECK(f.vacancies_bounded);
    }
  }
}

TEST_CASE("configuration path map is injective on the 4x4 box") {
  const Volume box = Volume::box({4, 4});
  std::set<std::tuple<std::uint64_t, int, Coord>> seen;
  std::size_t total = 0;
  for (std::uint64_t code = 0; code + 1 < (std::uint64_t{1} << 16); ++code) {
    const Configuration eta = Configuration::from_index(16, code);
    const auto p = config_path(box, eta, 4);
    for (const auto& st : p.steps) {
      seen.emplace(st.before.to_index(), st.site, p.target);
      ++total;
    }
  }
  CHECK(seen.size() == total);
}
