#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "fa1f/core_model.hpp"

namespace fa1f {

/// Exact rational num/den with den > 0.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  friend bool operator==(const Rational& a, const Rational& b) { return a.num * b.den == b.num * a.den; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return a.num * b.den <=> b.num * a.den;
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

std::int64_t floor_div(std::int64_t num, std::int64_t den);
std::int64_t ceil_div(std::int64_t num, std::int64_t den);

/// (s, axis) crossing: the segment from the origin to the target crosses an
/// integer value of coordinate `axis` at parameter s.
struct Witness {
  Rational s;
  int axis = 0;

  friend bool operator==(const Witness&, const Witness&) = default;
  friend std::strong_ordering operator<=>(const Witness& a, const Witness& b) {
    if (auto c = a.s <=> b.s; c != 0) return c;
    return a.axis <=> b.axis;
  }
};

struct GeometricPath {
  Coord target;
  std::vector<Coord> steps;         // steps[0] = origin, steps.back() = target
  std::vector<Witness> witnesses;   // witnesses[i-1] produces steps[i]
};

int l1_norm(const Coord& z);

/// Nearest-neighbour lattice path from the origin to z that follows the
/// straight segment, one unit step per crossing in lexicographic order of
/// (s, axis). Negative coordinates are handled by reflection.
GeometricPath canonical_path(const Coord& z);

/// (floor y_0, ..., floor y_axis, ceil y_{axis+1} - 1, ..., ceil y_{d-1} - 1).
/// `axis` is 0-based.
Coord floor_alpha(std::span<const double> y, int axis);
Coord floor_alpha(std::span<const Rational> y, int axis);

std::vector<Rational> scale(const Rational& s, const Coord& z);

/// Targets z in the nonnegative orthant with |y| < |z| <= ell whose canonical
/// path passes through y at step |y|.
std::vector<Coord> cone(const Coord& y, int ell);

struct ConfigPathStep {
  int site = 0;          // volume site flipped at this step
  Coord displacement;    // the same site relative to the origin
  Configuration before;
  Configuration after;
};

struct ConfigPath {
  Coord target;  // minimal-norm vacancy of the window (empty when the origin is empty)
  std::vector<ConfigPathStep> steps;
};

/// Sequence of allowed single-site flips that empties the origin, walking a
/// vacancy back along the canonical path of the nearest vacancy in the window
/// origin + {0,...,ell-1}^d. Each path site is flipped at most twice.
/// Throws PreconditionError if the window holds no vacancy.
ConfigPath config_path(const Volume& volume, const Configuration& eta, int ell);

/// Relative displacements of origin + {0,...,ell-1}^d in lexicographic order.
std::vector<Coord> box_displacements(int d, int ell);

}  // namespace fa1f
