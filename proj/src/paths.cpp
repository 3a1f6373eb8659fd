#include "fa1f/paths.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "fa1f/errors.hpp"

namespace fa1f {

std::int64_t floor_div(std::int64_t num, std::int64_t den) {
  std::int64_t q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t num, std::int64_t den) { return -floor_div(-num, den); }

int l1_norm(const Coord& z) {
  int n = 0;
  for (int x : z) n += std::abs(x);
  return n;
}

GeometricPath canonical_path(const Coord& z) {
  if (l1_norm(z) == 0) throw DomainError("canonical_path: target must differ from the origin");
  const int d = static_cast<int>(z.size());
  GeometricPath path;
  path.target = z;
  for (int a = 0; a < d; ++a) {
    // Axes with z_a = 0 never cross an integer inside (0,1] and contribute nothing.
    const int len = std::abs(z[a]);
    for (int k = 1; k <= len; ++k) path.witnesses.push_back({Rational{k, len}, a});
  }
  std::sort(path.witnesses.begin(), path.witnesses.end());
  path.steps.reserve(path.witnesses.size() + 1);
  path.steps.emplace_back(static_cast<std::size_t>(d), 0);
  for (const Witness& w : path.witnesses) {
    Coord next = path.steps.back();
    next[w.axis] += z[w.axis] > 0 ? 1 : -1;
    path.steps.push_back(std::move(next));
  }
  return path;
}

Coord floor_alpha(std::span<const double> y, int axis) {
  Coord out(y.size());
  for (std::size_t b = 0; b < y.size(); ++b) {
    out[b] = static_cast<int>(static_cast<int>(b) <= axis ? std::floor(y[b]) : std::ceil(y[b]) - 1.0);
  }
  return out;
}

Coord floor_alpha(std::span<const Rational> y, int axis) {
  Coord out(y.size());
  for (std::size_t b = 0; b < y.size(); ++b) {
    out[b] = static_cast<int>(static_cast<int>(b) <= axis ? floor_div(y[b].num, y[b].den)
                                                          : ceil_div(y[b].num, y[b].den) - 1);
  }
  return out;
}

std::vector<Rational> scale(const Rational& s, const Coord& z) {
  std::vector<Rational> out;
  out.reserve(z.size());
  for (int x : z) out.push_back({s.num * x, s.den});
  return out;
}

namespace {

// Calls visit(z) for every z in the nonnegative orthant with lo < |z| <= hi.
template <class Visit>
void for_each_orthant_point(int d, int lo, int hi, Visit&& visit) {
  Coord z(static_cast<std::size_t>(d), 0);
  auto rec = [&](auto&& self, int axis, int used) -> void {
    if (axis == d) {
      if (used > lo) visit(z);
      return;
    }
    for (int v = 0; used + v <= hi; ++v) {
      z[axis] = v;
      self(self, axis + 1, used + v);
    }
    z[axis] = 0;
  };
  rec(rec, 0, 0);
}

}  // namespace

std::vector<Coord> cone(const Coord& y, int ell) {
  const int m = l1_norm(y);
  if (m > ell) throw DomainError("cone: |y| exceeds ell");
  if (std::any_of(y.begin(), y.end(), [](int x) { return x < 0; })) {
    throw DomainError("cone: y must lie in the nonnegative orthant");
  }
  std::vector<Coord> out;
  for_each_orthant_point(static_cast<int>(y.size()), m, ell, [&](const Coord& z) {
    if (canonical_path(z).steps[static_cast<std::size_t>(m)] == y) out.push_back(z);
  });
  return out;
}

std::vector<Coord> box_displacements(int d, int ell) {
  std::vector<Coord> out;
  Coord c(static_cast<std::size_t>(d), 0);
  while (true) {
    out.push_back(c);
    int a = d - 1;
    while (a >= 0 && ++c[a] == ell) c[a--] = 0;
    if (a < 0) break;
  }
  return out;
}

ConfigPath config_path(const Volume& volume, const Configuration& eta, int ell) {
  if (volume.kind() == VolumeKind::graph) throw DomainError("config_path: needs a lattice volume");
  if (ell < 1) throw DomainError("config_path: ell must be positive");
  const int d = volume.dim();

  // Row-major enumeration is lexicographic, so the first minimum wins ties.
  ConfigPath out;
  int best_norm = -1;
  for (const Coord& x : box_displacements(d, ell)) {
    auto s = volume.relative_site(x);
    if (!s) throw DomainError("config_path: window does not fit in the volume");
    if (eta.empty_at(*s) && (best_norm < 0 || l1_norm(x) < best_norm)) {
      best_norm = l1_norm(x);
      out.target = x;
    }
  }
  if (best_norm < 0) throw PreconditionError("config_path: no vacancy in the window");
  if (best_norm == 0) return out;

  const int n = best_norm;
  const std::vector<Coord> gamma = canonical_path(out.target).steps;
  Configuration current = eta;
  const int origin = volume.origin();
  for (int i = 0; i <= 2 * n - 2; ++i) {
    const int k = (i % 2 == 0) ? n - i / 2 - 1 : n - (i - 1) / 2;
    const Coord& x = gamma[static_cast<std::size_t>(k)];
    const int site = *volume.relative_site(x);
    ConfigPathStep step{site, x, current, flip(current, site)};
    current = step.after;
    out.steps.push_back(std::move(step));
    if (current.empty_at(origin)) break;
  }
  return out;
}

}  // namespace fa1f
