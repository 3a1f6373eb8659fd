#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fa1f/core_model.hpp"
#include "fa1f/montecarlo.hpp"

namespace fa1f {

/// Rejection-free continuous-time FA1f dynamics. Active sites (at least one
/// empty neighbour) ring at rate 1 and resample from Bernoulli(1-q); a draw
/// equal to the current value is a null event that still advances the clock.
class Trajectory {
 public:
  Trajectory(const Volume& volume, double q, Configuration initial, Rng rng);

  const Volume& volume() const { return volume_; }
  const Configuration& current() const { return current_; }
  double clock() const { return clock_; }
  std::size_t events() const { return events_; }
  std::size_t active_count() const { return active_.size(); }
  bool active(int site) const { return position_[static_cast<std::size_t>(site)] >= 0; }

  /// Performs one event. Returns the resampled site, or -1 when no site is
  /// active (the configuration is frozen and the clock does not move).
  int step();
  /// Runs events up to time t; the clock ends at t unless frozen earlier.
  void advance_to(double t);

  /// Recomputes the active set from scratch and compares it with the
  /// incrementally maintained one.
  bool active_set_consistent() const;

 private:
  void add_active(int site);
  void remove_active(int site);
  void apply_flip(int site);

  Volume volume_;
  double q_;
  Configuration current_;
  Rng rng_;
  BernoulliThreshold empty_draw_;
  double clock_ = 0.0;
  std::size_t events_ = 0;
  std::vector<int> empty_neighbours_;
  std::vector<int> active_;
  std::vector<int> position_;
};

struct Tau0Sample {
  double time = 0.0;
  bool censored = false;  // origin still occupied at t_max
  bool frozen = false;    // no site can ever move; counted as censored too
};

/// First time the origin is empty, starting from equilibrium (conditioned on
/// a vacancy when `conditioned` is set).
Tau0Sample simulate_tau0(const Volume& volume, double q, Rng& rng, double t_max, bool conditioned);

struct Tau0Summary {
  Estimate mean;  // over runs that are neither frozen nor censored
  std::size_t runs = 0;
  std::size_t censored = 0;
  std::size_t frozen = 0;
  std::vector<Tau0Sample> samples;
};

/// Run i uses stream (seed, i).
Tau0Summary sample_tau0(const Volume& volume, double q, std::size_t runs, double t_max, bool conditioned,
                        const McOptions& opts);

struct PersistenceCurve {
  std::vector<double> times;
  std::vector<double> survival;
  std::vector<double> error;  // binomial standard error
  std::size_t n_traj = 0;
  std::size_t frozen = 0;
};

/// Empirical P(tau_0 > t) on an increasing grid from n_traj >= 100 runs
/// censored at the last grid time.
PersistenceCurve estimate_persistence(const Volume& volume, double q, std::span<const double> times,
                                      std::size_t n_traj, bool conditioned, const McOptions& opts);

struct RateFit {
  double rate = 0.0;
  double rate_err = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Weighted fit of log F against t on grid points with 0.01 < F < 0.9,
/// weights n F / (1 - F). Throws NumericalError with fewer than five points.
RateFit persistence_rate_fit(const PersistenceCurve& curve);

/// max(4 ell_q, 8).
int default_torus_side(double q, double q0, int d);
/// 50 q^-3, 50 q^-2 log(1/q), 50 q^-2 for d = 1, 2, >= 3.
double default_t_max(double q, int d);

}  // namespace fa1f
