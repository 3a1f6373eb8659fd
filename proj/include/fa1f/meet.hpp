#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "fa1f/core_model.hpp"
#include "fa1f/montecarlo.hpp"

namespace fa1f {

/// Function of an ordered vertex pair, stored as a |V| x |V| matrix.
using PairFunction = Eigen::MatrixXd;

/// Expected time for two independent rate-1 walkers started at (x, y) to come
/// within graph distance 1. Zero on pairs with d(x, y) <= 1.
struct MeetTable {
  Volume graph;
  PairFunction times;
  double mean = 0.0;      // |V|^-2 sum over all ordered pairs, diagonal included
  double residual = 0.0;  // infinity norm of the Poisson residual
  std::size_t unknowns = 0;

  int size() const { return graph.size(); }
  double tau(int x, int y) const { return times(x, y); }
};

/// All-pairs BFS distances. Throws StructuralError if the graph is disconnected.
Eigen::MatrixXi graph_distances(const Volume& g);

/// Solves -L_RW tau = 1 on pairs at distance > 1 with zero boundary values.
/// Direct sparse factorisation below 5e4 unknowns, preconditioned CG above.
/// Throws ResourceError beyond 1e6 unknowns, NumericalError if the residual
/// stays above 1e-10.
MeetTable solve_meeting_times(const Volume& g);

/// 1/(2|V|^2) sum_{x,y} [sum_{x'~x} (g(x',y)-g(x,y))^2 + sum_{y'~y} (g(x,y')-g(x,y))^2].
double rw_dirichlet(const PairFunction& g, const Volume& graph);

/// log(max(d(x, y), 1)).
PairFunction log_distance(const Volume& graph);

/// (|V|^-2 sum g)^2 / D_RW(g); g defaults to log_distance. Throws
/// PreconditionError when g is nonzero on a pair at distance <= 1 and
/// DegenerateEstimate when D_RW(g) = 0.
double meet_lower_bound(const Volume& graph, const std::optional<PairFunction>& g = std::nullopt);

struct FiniteGapReport {
  double mean_tau = 0.0;
  double q_over_meet = 0.0;  // infinite when mean_tau = 0
  Estimate mc_bound;         // D/Var of f_meet under the conditioned measure
  std::optional<double> exact_gap;
  bool degenerate = false;   // Var(f_meet) vanished, mc_bound undefined
  std::string warning;       // |V| far from c/q, or exact gap skipped
};

/// Ingredients of the finite-graph gap bound gap <= C q / tau_meet_bar.
/// The exact gap is computed when |V| <= max_exact_sites.
FiniteGapReport finite_gap_report(const Volume& graph, double q, std::size_t n, const McOptions& opts,
                                  double c = 0.0, int max_exact_sites = 12);

}  // namespace fa1f
