#include "fa1f/meet.hpp"

#include <cmath>
#include <algorithm>
#include <deque>
#include <limits>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "fa1f/errors.hpp"
#include "fa1f/exact.hpp"
#include "fa1f/testfn.hpp"

namespace fa1f {

namespace {

constexpr std::size_t kDirectLimit = 2000;
constexpr std::size_t kMaxUnknowns = 1000000;
constexpr double kResidualTol = 1e-10;

}  // namespace

Eigen::MatrixXi graph_distances(const Volume& g) {
  const int n = g.size();
  Eigen::MatrixXi dist = Eigen::MatrixXi::Constant(n, n, -1);
  std::deque<int> queue;
  for (int s = 0; s < n; ++s) {
    dist(s, s) = 0;
    queue.assign(1, s);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : g.neighbors(u)) {
        if (dist(s, v) < 0) {
          dist(s, v) = dist(s, u) + 1;
          queue.push_back(v);
        }
      }
    }
    for (int t = 0; t < n; ++t) {
      if (dist(s, t) < 0) throw StructuralError("graph is disconnected");
    }
  }
  return dist;
}

MeetTable solve_meeting_times(const Volume& g) {
  const int n = g.size();
  const Eigen::MatrixXi dist = graph_distances(g);
  Eigen::MatrixXi id = Eigen::MatrixXi::Constant(n, n, -1);
  std::vector<std::pair<int, int>> pairs;
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (dist(x, y) > 1) {
        id(x, y) = static_cast<int>(pairs.size());
        pairs.emplace_back(x, y);
      }
    }
  }
  const std::size_t m = pairs.size();
  if (m > kMaxUnknowns) throw ResourceError("meeting-time system exceeds 1e6 unknowns");

  MeetTable table{g, PairFunction::Zero(n, n), 0.0, 0.0, m};
  if (m == 0) return table;

  // (deg x + deg y) tau(x,y) - sum over moves staying at distance > 1 = 1.
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t k = 0; k < m; ++k) {
    const auto [x, y] = pairs[k];
    const int row = static_cast<int>(k);
    trip.emplace_back(row, row, static_cast<double>(g.degree(x) + g.degree(y)));
    for (int xp : g.neighbors(x)) {
      if (int c = id(xp, y); c >= 0) trip.emplace_back(row, c, -1.0);
    }
    for (int yp : g.neighbors(y)) {
      if (int c = id(x, yp); c >= 0) trip.emplace_back(row, c, -1.0);
    }
  }
  const auto dim = static_cast<Eigen::Index>(m);
  Eigen::SparseMatrix<double> A(dim, dim);
  A.setFromTriplets(trip.begin(), trip.end());
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(dim);
  Eigen::VectorXd tau;

  if (m < kDirectLimit) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw NumericalError("sparse factorisation of the meeting-time system failed");
    tau = ldlt.solve(rhs);
    // A few rounds of refinement bring the residual down to the tolerance.
    for (int round = 0; round < 5; ++round) {
      const Eigen::VectorXd r = rhs - A * tau;
      if (r.lpNorm<Eigen::Infinity>() < kResidualTol) break;
      tau += ldlt.solve(r);
    }
  } else {
    // Cholesky fill-in grows fast on pair graphs; diagonal CG converges in a few hundred steps.
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setMaxIterations(100000);
    cg.setTolerance(1e-12);
    cg.compute(A);
    tau = cg.solve(rhs);
    for (int round = 0; round < 5; ++round) {
      const Eigen::VectorXd r = rhs - A * tau;
      if (r.lpNorm<Eigen::Infinity>() < kResidualTol) break;
      tau += cg.solve(r);
    }
  }
  table.residual = (rhs - A * tau).lpNorm<Eigen::Infinity>();
  if (!(table.residual < kResidualTol)) {
    throw NumericalError("meeting-time solve did not reach residual 1e-10 (got " + std::to_string(table.residual) + ")");
  }
  for (std::size_t k = 0; k < m; ++k) table.times(pairs[k].first, pairs[k].second) = tau[static_cast<Eigen::Index>(k)];
  // The system is symmetric under swapping walkers; remove rounding asymmetry.
  table.times = 0.5 * (table.times + table.times.transpose()).eval();
  table.mean = table.times.sum() / (static_cast<double>(n) * n);
  return table;
}

double rw_dirichlet(const PairFunction& g, const Volume& graph) {
  const int n = graph.size();
  if (g.rows() != n || g.cols() != n) throw DomainError("pair function does not match the graph");
  double total = 0.0;
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      const double v = g(x, y);
      for (int xp : graph.neighbors(x)) total += (g(xp, y) - v) * (g(xp, y) - v);
      for (int yp : graph.neighbors(y)) total += (g(x, yp) - v) * (g(x, yp) - v);
    }
  }
  return total / (2.0 * n * n);
}

PairFunction log_distance(const Volume& graph) {
  const Eigen::MatrixXi dist = graph_distances(graph);
  return dist.cast<double>().unaryExpr([](double d) { return std::log(std::max(d, 1.0)); });
}

double meet_lower_bound(const Volume& graph, const std::optional<PairFunction>& g) {
  const PairFunction h = g ? *g : log_distance(graph);
  const int n = graph.size();
  if (h.rows() != n || h.cols() != n) throw DomainError("pair function does not match the graph");
  const Eigen::MatrixXi dist = graph_distances(graph);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (dist(x, y) <= 1 && h(x, y) != 0.0) {
        throw PreconditionError("test pair function must vanish on pairs at distance at most 1");
      }
    }
  }
  const double dir = rw_dirichlet(h, graph);
  if (!(dir > 0.0)) throw DegenerateEstimate("random-walk Dirichlet form of the test pair function vanishes");
  const double mean = h.sum() / (static_cast<double>(n) * n);
  return mean * mean / dir;
}

FiniteGapReport finite_gap_report(const Volume& graph, double q, std::size_t n, const McOptions& opts, double c,
                                  int max_exact_sites) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0,1)");
  FiniteGapReport r;
  const MeetTable table = solve_meeting_times(graph);
  r.mean_tau = table.mean;
  r.q_over_meet = table.mean > 0.0 ? q / table.mean : std::numeric_limits<double>::infinity();
  if (c > 0.0) {
    const double target = c / q;
    if (std::abs(graph.size() - target) > 0.2 * target) {
      r.warning = "|V| = " + std::to_string(graph.size()) + " is not within 20% of c/q = " + std::to_string(target);
    }
  }
  const TestFunction f = make_f_meet(table);
  try {
    r.mc_bound = gap_upper_bound(f, graph, q, conditioned_sampler(graph, q), n, opts);
  } catch (const DegenerateEstimate&) {
    r.degenerate = true;
  }
  if (graph.size() <= max_exact_sites) {
    r.exact_gap = exact_gap(build_generator(graph, q, true));
  } else if (!r.warning.empty()) {
    r.warning += "; exact gap skipped";
  } else {
    r.warning = "exact gap skipped above " + std::to_string(max_exact_sites) + " sites";
  }
  return r;
}

}  // namespace fa1f
