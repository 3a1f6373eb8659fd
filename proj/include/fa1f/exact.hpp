#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "fa1f/core_model.hpp"
#include "fa1f/testfn.hpp"

namespace fa1f {

inline constexpr int kMaxEnumerableSites = 20;
inline constexpr int kMaxPersistenceSites = 16;
inline constexpr std::size_t kMaxDenseStates = 4096;

/// Every configuration of a small volume with its equilibrium weight.
/// State codes use bit i for site i (1 = occupied).
struct StateSpace {
  Volume volume;
  double q = 0.0;
  bool conditioned = false;           // weights are mu conditioned on a vacancy
  std::vector<std::uint32_t> states;  // increasing codes
  std::vector<double> weights;
  std::vector<std::int32_t> index;    // code -> position in states, -1 when excluded

  int sites() const { return volume.size(); }
  std::size_t count() const { return states.size(); }
  Configuration config(std::size_t i) const { return Configuration::from_index(sites(), states[i]); }
};

/// Generator L with jump rates c_x q (empty an occupied site) and c_x (1-q)
/// (fill an empty one). The diagonal holds minus the row sums.
struct SparseRateMatrix {
  Eigen::SparseMatrix<double, Eigen::RowMajor> generator;

  std::size_t dimension() const { return static_cast<std::size_t>(generator.rows()); }
  /// Largest |row sum| of the generator.
  double row_sum_defect() const;
  /// Largest |w_i L_ij - w_j L_ji| over off-diagonal entries.
  double detailed_balance_defect(std::span<const double> weights) const;
};

struct Generator {
  StateSpace space;
  SparseRateMatrix rates;
};

/// Enumerates the volume. Conditioned spaces drop the all-occupied state.
/// Throws ResourceError beyond kMaxEnumerableSites sites.
StateSpace enumerate_states(const Volume& volume, double q, bool conditioned);
Generator build_generator(const Volume& volume, double q, bool conditioned);

/// Smallest nonzero eigenvalue of -L on its ergodic class. Frozen states
/// (no outflow) are dropped; returns 0 when two or more nontrivial classes
/// remain. Throws PreconditionError if L is not reversible with respect to the
/// weights and ResourceError when the class exceeds kMaxDenseStates.
double exact_gap(const Generator& gen);

/// E(tau_0) under the conditioned measure: solves (-L_hat) u = 1 on states
/// with an occupied origin, L_hat killed when the origin empties. Throws
/// StructuralError when some state cannot reach an empty origin.
double exact_expected_tau0(const Volume& volume, double q);

/// Conditioning used for persistence and tau_0 sampling: graphs start from the
/// conditioned measure, lattice volumes from the plain product measure.
bool conditioned_by_default(const Volume& volume);

/// F_0(t) = P(tau_0 > t) for each t, by uniformization of the killed
/// generator with Poisson truncation error below 1e-10. Frozen states survive.
/// Throws DomainError for t < 0 and ResourceError beyond kMaxPersistenceSites.
std::vector<double> exact_persistence(const Volume& volume, double q, std::span<const double> times,
                                      bool conditioned);
double exact_persistence(const Volume& volume, double q, double t, bool conditioned);
/// d/dt F_0 at t = 0: minus the equilibrium rate of emptying an occupied origin.
double persistence_initial_slope(const Volume& volume, double q, bool conditioned);

struct ExactMoments {
  double mean = 0.0;
  double variance = 0.0;
  double dirichlet = 0.0;
};

/// Full summation of mu(f), Var(f) and D(f) over the space's weights.
ExactMoments exact_moments(const TestFunction& f, const StateSpace& space);

/// Values of f on every code 0 .. 2^N - 1.
std::vector<double> tabulate(const TestFunction& f, const Volume& volume);

/// Auxiliary block Dirichlet form: sum over ell-blocks B of
/// mu(c_B Var_B(f)), where c_B = 1 iff none of the blocks B + ell e_a holds
/// only occupied sites and Var_B resamples B from the product measure.
/// Blocks outside the volume count as fully occupied unless
/// outside_satisfied is set; tori wrap. Throws DomainError when the volume is
/// not a union of ell-blocks, PreconditionError on a conditioned space.
double aux_dirichlet(const TestFunction& f, int ell, const StateSpace& space, bool outside_satisfied = false);

struct PathPoincareReport {
  double lhs = 0.0;        // mu(chi_ell f^2)
  double dirichlet = 0.0;  // D(f)
  double ratio = 0.0;      // lhs / D, 0 when both vanish, +inf when only D does
  double tau_ref = 0.0;    // reference scale with unit constant
  /// max over dynamics edges e of sum_{eta: path uses e} mu(eta) j(eta) / R_e,
  /// so that mu(chi_ell f^2) <= congestion * D(f) for f vanishing at an empty origin.
  double congestion = 0.0;
  int max_path_length = 0;
  bool vanishes_at_empty_origin = false;
};

PathPoincareReport path_poincare_report(const TestFunction& f, int ell, const StateSpace& space);

/// ell^2/q, max(log ell, 1) ell^2/q, ell^d/q for d = 1, 2, >= 3.
double tau_reference(int d, int ell, double q);

}  // namespace fa1f
