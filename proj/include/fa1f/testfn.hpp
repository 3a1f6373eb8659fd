#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fa1f/core_model.hpp"

namespace fa1f {

struct MeetTable;

/// A real function of the configuration together with the set of sites it
/// depends on.
struct TestFunction {
  std::string label;
  std::function<double(const Configuration&)> evaluate;
  /// Sites whose flip can change the value.
  std::vector<int> support;
  /// Optional fast integrand g(eta; q) with mu(g) = sum_x mu(c_x (f(eta^x) - f(eta))^2).
  /// When absent the Dirichlet estimator re-evaluates f on every flip.
  std::function<double(const Configuration&, double)> dirichlet_integrand;
};

/// The box origin + {0,...,ell-1}^d, with the lattice adjacency restricted to
/// the window (no wrapping even on a torus).
class BoxWindow {
 public:
  BoxWindow(const Volume& volume, int ell);

  int ell() const { return ell_; }
  const std::vector<int>& sites() const { return sites_; }
  /// Window-local indices of the in-window lattice neighbours of local site i.
  const std::vector<int>& local_neighbors(int i) const { return local_adj_[static_cast<std::size_t>(i)]; }

 private:
  int ell_;
  std::vector<int> sites_;
  std::vector<std::vector<int>> local_adj_;
};

/// The 1-norm ball {x : |x|_1 <= radius} around the origin.
class BallWindow {
 public:
  BallWindow(const Volume& volume, int radius);

  int radius() const { return radius_; }
  const std::vector<int>& sites() const { return sites_; }
  const std::vector<int>& norms() const { return norms_; }

 private:
  int radius_;
  std::vector<int> sites_;
  std::vector<int> norms_;
};

/// Number of connected components of empty sites inside the window.
int cluster_count(const Volume& volume, const Configuration& eta, int ell);
int cluster_count(const BoxWindow& window, const Configuration& eta);

/// 1 iff the window origin + {0,...,ell-1}^d contains a vacancy.
int chi_ell(const Volume& volume, const Configuration& eta, int ell);

/// Distance xi to the nearest vacancy folded into a tent: xi for xi < ell,
/// 2 ell - xi for ell <= xi < 2 ell, 0 beyond. Needs d = 1 and radius 2 ell.
int f_one_d(const Volume& volume, const Configuration& eta, int ell);

/// min over vacancies x of log(1 + min(|x|_1, ell)); log(1 + ell) without a
/// vacancy in the ball of radius ell. Needs d = 2.
double f_two_d(const Volume& volume, const Configuration& eta, int ell);

/// Occupancy of the origin.
int f_origin(const Volume& volume, const Configuration& eta);

/// Largest meeting time over pairs of vacancies; 0 with fewer than two.
double f_meet(const Configuration& eta, const MeetTable& meet);

TestFunction make_cluster_count(const Volume& volume, int ell);
TestFunction make_chi_ell(const Volume& volume, int ell);
TestFunction make_f_one_d(const Volume& volume, int ell);
TestFunction make_f_two_d(const Volume& volume, int ell);
TestFunction make_f_origin(const Volume& volume);
TestFunction make_f_meet(const MeetTable& meet);
TestFunction make_constant(double value);
/// c * f, same support. Used to check scale invariance of ratios.
TestFunction scaled(const TestFunction& f, double c);

}  // namespace fa1f
