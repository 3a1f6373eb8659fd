#pragma once

// Brute-force references written independently of the library internals:
// they work on Configuration objects and the public constraint() only.

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fa1f/core_model.hpp"
#include "fa1f/testfn.hpp"

namespace oracle {

using fa1f::Configuration;
using fa1f::Volume;

inline double product_prob(const Configuration& eta, double q) {
  double p = 1.0;
  for (int i = 0; i < eta.size(); ++i) p *= eta.empty_at(i) ? q : 1.0 - q;
  return p;
}

struct Enumerated {
  std::vector<Configuration> states;
  std::vector<double> weights;
};

inline Enumerated enumerate(const Volume& v, double q, bool conditioned) {
  Enumerated e;
  const int n = v.size();
  double total = 0.0;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
    Configuration eta = Configuration::from_index(n, code);
    if (conditioned && eta.vacancies() == 0) continue;
    e.weights.push_back(product_prob(eta, q));
    total += e.weights.back();
    e.states.push_back(std::move(eta));
  }
  for (double& w : e.weights) w /= total;
  return e;
}

struct Moments {
  double mean = 0, variance = 0, dirichlet = 0;
};

// Direct transcription of mu(f), Var(f), q(1-q) sum_x mu(c_x (f(eta^x)-f(eta))^2).
inline Moments moments(const fa1f::TestFunction& f, const Volume& v, double q, bool conditioned) {
  const auto e = enumerate(v, q, conditioned);
  Moments m;
  double second = 0.0;
  for (std::size_t i = 0; i < e.states.size(); ++i) {
    const double x = f.evaluate(e.states[i]);
    m.mean += e.weights[i] * x;
    second += e.weights[i] * x * x;
    for (int s = 0; s < v.size(); ++s) {
      if (!fa1f::constraint(v, e.states[i], s)) continue;
      const double d = f.evaluate(fa1f::flip(e.states[i], s)) - x;
      m.dirichlet += e.weights[i] * d * d;
    }
  }
  m.variance = second - m.mean * m.mean;
  m.dirichlet *= q * (1.0 - q);
  return m;
}

// Dense generator on the enumerated states.
inline Eigen::MatrixXd dense_generator(const Volume& v, double q, const Enumerated& e) {
  const auto n = static_cast<Eigen::Index>(e.states.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int s = 0; s < v.size(); ++s) {
      if (!fa1f::constraint(v, e.states[i], s)) continue;
      const Configuration to = fa1f::flip(e.states[i], s);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (e.states[j] == to) {
          L(i, j) += e.states[i].empty_at(s) ? 1.0 - q : q;
          L(i, i) -= e.states[i].empty_at(s) ? 1.0 - q : q;
        }
      }
    }
  }
  return L;
}

// Killed-chain expected hitting time of an empty origin, dense solve.
inline double expected_tau0(const Volume& v, double q) {
  const auto e = enumerate(v, q, true);
  const Eigen::MatrixXd L = dense_generator(v, q, e);
  std::vector<Eigen::Index> alive;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(e.states.size()); ++i) {
    if (!e.states[i].empty_at(v.origin())) alive.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(alive.size());
  Eigen::MatrixXd A(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) A(a, b) = -L(alive[a], alive[b]);
  const Eigen::VectorXd u = A.fullPivLu().solve(Eigen::VectorXd::Ones(m));
  double total = 0.0;
  for (Eigen::Index a = 0; a < m; ++a) total += e.weights[alive[a]] * u[a];
  return total;
}

// Survival via the dense matrix exponential of the killed generator.
inline double persistence(const Volume& v, double q, double t, bool conditioned) {
  const auto e = enumerate(v, q, conditioned);
  const Eigen::MatrixXd L = dense_generator(v, q, e);
  std::vector<Eigen::Index> alive;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(e.states.size()); ++i) {
    if (!e.states[i].empty_at(v.origin())) alive.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(alive.size());
  Eigen::MatrixXd A(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) A(a, b) = L(alive[a], alive[b]);
  // Killed generator is similar to a symmetric matrix; use the eigendecomposition.
  Eigen::VectorXd sw(m);
  for (Eigen::Index a = 0; a < m; ++a) sw[a] = std::sqrt(e.weights[alive[a]]);
  Eigen::MatrixXd S = sw.asDiagonal() * A * sw.cwiseInverse().asDiagonal();
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::MatrixXd E = es.eigenvectors() * (es.eigenvalues() * t).array().exp().matrix().asDiagonal() *
                            es.eigenvectors().transpose();
  // F = w^T exp(tA) 1 = sw^T exp(tS) sw.
  return sw.dot(E * sw);
}

// Pearson statistic and a conservative p > 0.001 acceptance via the
// Wilson-Hilferty normal approximation of the chi-square quantile.
inline bool chi_square_ok(const std::vector<double>& observed, const std::vector<double>& expected) {
  double stat = 0.0;
  int dof = -1;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) continue;
    stat += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    ++dof;
  }
  if (dof < 1) return true;
  const double k = dof, z = 3.0902;  // upper 0.001 normal quantile
  const double crit = k * std::pow(1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k)), 3.0);
  return stat < crit;
}

}  // namespace oracle
