#pragma once

#include <map>
#include <vector>

#include "fa1f/paths.hpp"

namespace path_checks {

using fa1f::Configuration;
using fa1f::Coord;
using fa1f::Volume;

// Every z in the nonnegative orthant of dimension d with 1 <= |z| <= max_norm.
inline std::vector<Coord> orthant(int d, int max_norm) {
  std::vector<Coord> out;
  Coord z(static_cast<std::size_t>(d), 0);
  auto rec = [&](auto&& self, int axis, int used) -> void {
    if (axis == d) {
      if (used > 0) out.push_back(z);
      return;
    }
    for (int v = 0; used + v <= max_norm; ++v) {
      z[axis] = v;
      self(self, axis + 1, used + v);
    }
    z[axis] = 0;
  };
  rec(rec, 0, 0);
  return out;
}

struct PathFacts {
  bool allowed = true;        // each step has its constraint
  bool ends_empty = true;     // final configuration has an empty origin
  bool on_path = true;        // every flipped site lies on the canonical path of the target
  bool twice_at_most = true;  // each site flipped at most twice
  bool within_2ell = true;    // j <= 2 ell, the literal length bound
  bool within_2dell = true;   // j <= 2 d ell
  bool vacancies_bounded = true;
  std::size_t steps = 0;
};

inline PathFacts check_path(const Volume& v, const Configuration& eta, int ell) {
  PathFacts f;
  const auto p = fa1f::config_path(v, eta, ell);
  std::vector<int> window;
  for (const Coord& x : fa1f::box_displacements(v.dim(), ell)) window.push_back(*v.relative_site(x));
  int base = 0;
  for (int s : window) base += eta.empty_at(s);
  std::vector<Coord> path;
  if (!p.steps.empty()) path = fa1f::canonical_path(p.target).steps;
  std::map<int, int> uses;
  for (const auto& st : p.steps) {
    f.allowed = f.allowed && fa1f::constraint(v, st.before, st.site) && st.after == fa1f::flip(st.before, st.site);
    f.on_path = f.on_path && std::find(path.begin(), path.end(), st.displacement) != path.end();
    f.twice_at_most = f.twice_at_most && ++uses[st.site] <= 2;
    int empties = 0;
    for (int s : window) empties += s != st.site && st.before.empty_at(s);
    f.vacancies_bounded = f.vacancies_bounded && empties <= base;
  }
  const Configuration last = p.steps.empty() ? eta : p.steps.back().after;
  f.ends_empty = last.empty_at(v.origin());
  f.steps = p.steps.size();
  f.within_2ell = static_cast<int>(f.steps) <= 2 * ell;
  f.within_2dell = static_cast<int>(f.steps) <= 2 * v.dim() * ell;
  return f;
}

}  // namespace path_checks
