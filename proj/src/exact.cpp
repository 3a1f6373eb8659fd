#include "fa1f/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "fa1f/errors.hpp"
#include "fa1f/paths.hpp"

namespace fa1f {

namespace {

void require_enumerable(const Volume& volume, int cap) {
  if (volume.size() > cap) {
    throw ResourceError("volume of " + std::to_string(volume.size()) + " sites exceeds the enumeration cap of " +
                        std::to_string(cap));
  }
}

// Product weight of a code: (1-q)^occupied q^empty.
double product_weight(std::uint32_t code, int n, double log_fill, double log_empty) {
  const int occ = std::popcount(code);
  return std::exp(occ * log_fill + (n - occ) * log_empty);
}

// Neighbour masks per site, so c_x(code) = (code & mask[x]) != mask[x].
std::vector<std::uint32_t> neighbour_masks(const Volume& volume) {
  std::vector<std::uint32_t> masks(static_cast<std::size_t>(volume.size()), 0);
  for (int x = 0; x < volume.size(); ++x) {
    for (int y : volume.neighbors(x)) masks[x] |= 1u << y;
  }
  return masks;
}

bool constrained(std::uint32_t code, std::uint32_t mask) { return (code & mask) != mask; }

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// States with an occupied origin and the killed generator restricted to them.
struct KilledChain {
  std::vector<std::size_t> states;  // positions in the space
  std::vector<double> weights;
  std::vector<double> exit;         // total outflow, killing included
  Eigen::SparseMatrix<double, Eigen::RowMajor> transfer;  // rates between surviving states
};

KilledChain killed_chain(const Generator& gen) {
  const auto& space = gen.space;
  const std::uint32_t origin_bit = 1u << space.volume.origin();
  KilledChain k;
  std::vector<std::int64_t> local(space.count(), -1);
  for (std::size_t i = 0; i < space.count(); ++i) {
    if (space.states[i] & origin_bit) {
      local[i] = static_cast<std::int64_t>(k.states.size());
      k.states.push_back(i);
      k.weights.push_back(space.weights[i]);
    }
  }
  const auto& L = gen.rates.generator;
  std::vector<Eigen::Triplet<double>> trip;
  k.exit.assign(k.states.size(), 0.0);
  for (std::size_t a = 0; a < k.states.size(); ++a) {
    const auto row = static_cast<Eigen::Index>(k.states[a]);
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(L, row); it; ++it) {
      if (it.col() == row) continue;
      k.exit[a] += it.value();
      const auto b = local[static_cast<std::size_t>(it.col())];
      if (b >= 0) trip.emplace_back(static_cast<int>(a), static_cast<int>(b), it.value());
    }
  }
  const auto m = static_cast<Eigen::Index>(k.states.size());
  k.transfer.resize(m, m);
  k.transfer.setFromTriplets(trip.begin(), trip.end());
  return k;
}

Generator generator_for(const Volume& volume, double q, bool conditioned) {
  return build_generator(volume, q, conditioned);
}

}  // namespace

double SparseRateMatrix::row_sum_defect() const {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < generator.outerSize(); ++r) {
    double s = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(generator, r); it; ++it) s += it.value();
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

double SparseRateMatrix::detailed_balance_defect(std::span<const double> weights) const {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < generator.outerSize(); ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(generator, r); it; ++it) {
      if (it.col() == r) continue;
      const double back = generator.coeff(it.col(), r);
      worst = std::max(worst, std::abs(weights[r] * it.value() - weights[it.col()] * back));
    }
  }
  return worst;
}

StateSpace enumerate_states(const Volume& volume, double q, bool conditioned) {
  require_enumerable(volume, kMaxEnumerableSites);
  if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0,1)");
  const int n = volume.size();
  const std::uint32_t full = n == 32 ? ~0u : (1u << n) - 1u;
  StateSpace s{volume, q, conditioned, {}, {}, {}};
  s.index.assign(static_cast<std::size_t>(full) + 1, -1);
  const double lf = std::log1p(-q), le = std::log(q);
  double total = 0.0;
  for (std::uint32_t code = 0; code <= full; ++code) {
    if (conditioned && code == full) break;
    s.index[code] = static_cast<std::int32_t>(s.states.size());
    s.states.push_back(code);
    s.weights.push_back(product_weight(code, n, lf, le));
    total += s.weights.back();
  }
  for (double& w : s.weights) w /= total;
  return s;
}

Generator build_generator(const Volume& volume, double q, bool conditioned) {
  Generator g{enumerate_states(volume, q, conditioned), {}};
  const auto& space = g.space;
  const auto masks = neighbour_masks(volume);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(space.count() * static_cast<std::size_t>(volume.size() / 2 + 1));
  for (std::size_t i = 0; i < space.count(); ++i) {
    const std::uint32_t code = space.states[i];
    double out = 0.0;
    for (int x = 0; x < volume.size(); ++x) {
      if (!constrained(code, masks[x])) continue;
      const std::uint32_t to = code ^ (1u << x);
      const double rate = (code >> x) & 1u ? q : 1.0 - q;
      const auto j = space.index[to];
      if (j < 0) continue;  // only reachable from the excluded frozen state
      trip.emplace_back(static_cast<int>(i), j, rate);
      out += rate;
    }
    trip.emplace_back(static_cast<int>(i), static_cast<int>(i), -out);
  }
  const auto m = static_cast<Eigen::Index>(space.count());
  g.rates.generator.resize(m, m);
  g.rates.generator.setFromTriplets(trip.begin(), trip.end());
  return g;
}

double exact_gap(const Generator& gen) {
  const auto& space = gen.space;
  const auto& L = gen.rates.generator;
  double scale = 1.0;
  for (Eigen::Index k = 0; k < L.nonZeros(); ++k) scale = std::max(scale, std::abs(L.valuePtr()[k]));
  if (gen.rates.detailed_balance_defect(space.weights) > 1e-12 * scale) {
    throw PreconditionError("generator is not reversible with respect to the state weights");
  }
  const std::size_t n = space.count();
  UnionFind uf(n);
  std::vector<bool> moving(n, false);
  for (Eigen::Index r = 0; r < L.outerSize(); ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(L, r); it; ++it) {
      if (it.col() != r && it.value() > 0.0) {
        moving[static_cast<std::size_t>(r)] = true;
        uf.unite(static_cast<std::size_t>(r), static_cast<std::size_t>(it.col()));
      }
    }
  }
  std::size_t root = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (!moving[i]) continue;
    const std::size_t r = uf.find(i);
    if (root == n) root = r;
    else if (r != root) return 0.0;
  }
  if (root == n) return 0.0;
  std::vector<std::int64_t> local(n, -1);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < n; ++i) {
    if (moving[i] && uf.find(i) == root) {
      local[i] = static_cast<std::int64_t>(members.size());
      members.push_back(i);
    }
  }
  const std::size_t m = members.size();
  if (m > kMaxDenseStates) {
    throw ResourceError("ergodic class of " + std::to_string(m) + " states exceeds the dense eigensolver cap");
  }
  Eigen::VectorXd sqrt_w(static_cast<Eigen::Index>(m));
  for (std::size_t a = 0; a < m; ++a) sqrt_w[static_cast<Eigen::Index>(a)] = std::sqrt(space.weights[members[a]]);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t a = 0; a < m; ++a) {
    const auto r = static_cast<Eigen::Index>(members[a]);
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(L, r); it; ++it) {
      const auto b = local[static_cast<std::size_t>(it.col())];
      if (b < 0) continue;
      S(static_cast<Eigen::Index>(a), b) = -it.value() * sqrt_w[static_cast<Eigen::Index>(a)] / sqrt_w[b];
    }
  }
  // Symmetrize away rounding before the eigensolve.
  S = 0.5 * (S + S.transpose()).eval();
  if (m < 2) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  return std::max(0.0, eig.eigenvalues()[1]);
}

double exact_expected_tau0(const Volume& volume, double q) {
  const Generator gen = generator_for(volume, q, true);
  const KilledChain k = killed_chain(gen);
  const std::size_t m = k.states.size();
  if (m == 0) return 0.0;

  // Every surviving state must lead to an empty origin.
  std::vector<std::vector<std::size_t>> reverse(m);
  std::vector<bool> good(m, false);
  std::vector<std::size_t> stack;
  for (std::size_t a = 0; a < m; ++a) {
    double inner = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(k.transfer, static_cast<Eigen::Index>(a)); it;
         ++it) {
      inner += it.value();
      reverse[static_cast<std::size_t>(it.col())].push_back(a);
    }
    if (k.exit[a] - inner > 1e-15) {
      good[a] = true;
      stack.push_back(a);
    }
  }
  while (!stack.empty()) {
    const std::size_t b = stack.back();
    stack.pop_back();
    for (std::size_t a : reverse[b]) {
      if (!good[a]) good[a] = true, stack.push_back(a);
    }
  }
  if (std::find(good.begin(), good.end(), false) != good.end()) {
    throw StructuralError("the origin cannot be emptied from some configuration; the killed generator is singular");
  }

  Eigen::SparseMatrix<double> A = -k.transfer;
  for (std::size_t a = 0; a < m; ++a) A.coeffRef(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) += k.exit[a];
  A.makeCompressed();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m));
  Eigen::VectorXd u;
  if (m <= (std::size_t{1} << 14)) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw NumericalError("sparse LU failed on the killed generator");
    u = lu.solve(ones);
  } else {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
    solver.setTolerance(1e-13);
    solver.setMaxIterations(20000);
    solver.compute(A);
    u = solver.solve(ones);
    if (solver.info() != Eigen::Success) throw NumericalError("iterative solve of the killed generator did not converge");
  }
  const double residual = (A * u - ones).lpNorm<Eigen::Infinity>();
  if (!(residual <= 1e-8 * std::max(1.0, u.lpNorm<Eigen::Infinity>()))) {
    throw NumericalError("killed generator solve residual too large");
  }
  double total = 0.0;
  for (std::size_t a = 0; a < m; ++a) total += k.weights[a] * u[static_cast<Eigen::Index>(a)];
  return total;
}

bool conditioned_by_default(const Volume& volume) { return volume.kind() == VolumeKind::graph; }

std::vector<double> exact_persistence(const Volume& volume, double q, std::span<const double> times,
                                      bool conditioned) {
  for (double t : times) {
    if (!(t >= 0.0)) throw DomainError("persistence time must be nonnegative");
  }
  require_enumerable(volume, kMaxPersistenceSites);
  const Generator gen = generator_for(volume, q, conditioned);
  const KilledChain k = killed_chain(gen);
  const std::size_t m = k.states.size();
  std::vector<double> out(times.size(), 0.0);
  if (m == 0) return out;
  const double rate = *std::max_element(k.exit.begin(), k.exit.end());
  Eigen::Map<const Eigen::VectorXd> w(k.weights.data(), static_cast<Eigen::Index>(m));
  if (rate <= 0.0) {
    std::fill(out.begin(), out.end(), w.sum());
    return out;
  }
  // P = I + L_hat / rate is substochastic; F(t) = sum_k Pois(rate t; k) w^T P^k 1.
  Eigen::SparseMatrix<double, Eigen::RowMajor> P = k.transfer / rate;
  for (std::size_t a = 0; a < m; ++a) {
    P.coeffRef(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) += 1.0 - k.exit[a] / rate;
  }
  const double t_max = *std::max_element(times.begin(), times.end());
  const double lambda_max = rate * t_max;
  // Poisson mass beyond K is below 1e-10 for every t <= t_max.
  std::size_t K = static_cast<std::size_t>(std::ceil(lambda_max + 12.0 * std::sqrt(lambda_max) + 40.0));
  Eigen::VectorXd v = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m));
  std::vector<double> mass(times.size(), 0.0);
  for (std::size_t step = 0;; ++step) {
    const double term = w.dot(v);
    bool converged = true;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double lt = rate * times[i];
      double pk;
      if (lt == 0.0) pk = step == 0 ? 1.0 : 0.0;
      else pk = std::exp(-lt + static_cast<double>(step) * std::log(lt) - std::lgamma(static_cast<double>(step) + 1.0));
      out[i] += pk * term;
      mass[i] += pk;
      if (1.0 - mass[i] > 1e-10 && !(static_cast<double>(step) > lt && pk < 1e-18)) converged = false;
    }
    if (converged || step >= K) break;
    v = P * v;
  }
  for (double& f : out) f = std::clamp(f, 0.0, 1.0);
  return out;
}

double exact_persistence(const Volume& volume, double q, double t, bool conditioned) {
  const double times[] = {t};
  return exact_persistence(volume, q, times, conditioned)[0];
}

double persistence_initial_slope(const Volume& volume, double q, bool conditioned) {
  require_enumerable(volume, kMaxPersistenceSites);
  const Generator gen = generator_for(volume, q, conditioned);
  const KilledChain k = killed_chain(gen);
  double slope = 0.0;
  for (std::size_t a = 0; a < k.states.size(); ++a) {
    double inner = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(k.transfer, static_cast<Eigen::Index>(a)); it;
         ++it) {
      inner += it.value();
    }
    slope -= k.weights[a] * (k.exit[a] - inner);
  }
  return slope;
}

std::vector<double> tabulate(const TestFunction& f, const Volume& volume) {
  require_enumerable(volume, kMaxEnumerableSites);
  const std::size_t n = std::size_t{1} << volume.size();
  std::vector<double> values(n);
  for (std::size_t code = 0; code < n; ++code) {
    values[code] = f.evaluate(Configuration::from_index(volume.size(), code));
  }
  return values;
}

ExactMoments exact_moments(const TestFunction& f, const StateSpace& space) {
  const auto values = tabulate(f, space.volume);
  const auto masks = neighbour_masks(space.volume);
  const int n = space.sites();
  ExactMoments m;
  double second = 0.0, dir = 0.0;
  for (std::size_t i = 0; i < space.count(); ++i) {
    const std::uint32_t code = space.states[i];
    const double w = space.weights[i];
    const double v = values[code];
    m.mean += w * v;
    second += w * v * v;
    double local = 0.0;
    for (int x = 0; x < n; ++x) {
      if (!constrained(code, masks[x])) continue;
      const double diff = values[code ^ (1u << x)] - v;
      local += diff * diff;
    }
    dir += w * local;
  }
  m.variance = std::max(0.0, second - m.mean * m.mean);
  m.dirichlet = space.q * (1.0 - space.q) * dir;
  return m;
}

double aux_dirichlet(const TestFunction& f, int ell, const StateSpace& space, bool outside_satisfied) {
  const Volume& volume = space.volume;
  if (space.conditioned) throw PreconditionError("aux_dirichlet needs the unconditioned product measure");
  if (volume.kind() == VolumeKind::graph) throw DomainError("aux_dirichlet needs a box or torus");
  if (ell < 1) throw DomainError("block side must be positive");
  const int d = volume.dim();
  std::vector<int> nb(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    if (volume.extents()[a] % ell != 0) throw DomainError("volume is not a union of ell-blocks");
    nb[a] = volume.extents()[a] / ell;
    if (volume.periodic() && nb[a] < 2) throw DomainError("periodic axis needs at least two blocks");
  }
  int blocks = 1;
  for (int b : nb) blocks *= b;
  // Block masks, row-major over block coordinates.
  std::vector<std::uint32_t> block_mask(static_cast<std::size_t>(blocks), 0);
  auto block_of = [&](const Coord& c) {
    int b = 0;
    for (int a = 0; a < d; ++a) b = b * nb[a] + c[a] / ell;
    return b;
  };
  for (int s = 0; s < volume.size(); ++s) block_mask[block_of(volume.coords(s))] |= 1u << s;

  const auto values = tabulate(f, volume);
  const int n = volume.size();
  const double q = space.q;
  const double lf = std::log1p(-q), le = std::log(q);
  const std::uint32_t full = (1u << n) - 1u;
  double total = 0.0;
  for (int B = 0; B < blocks; ++B) {
    // Block coordinates of B.
    Coord bc(static_cast<std::size_t>(d));
    for (int a = d - 1, r = B; a >= 0; --a) bc[a] = r % nb[a], r /= nb[a];
    std::vector<std::uint32_t> up;  // masks of in-volume up neighbours
    bool violated_outside = false;
    for (int a = 0; a < d; ++a) {
      Coord c = bc;
      c[a] += 1;
      if (c[a] >= nb[a]) {
        if (volume.periodic()) c[a] = 0;
        else {
          violated_outside = violated_outside || !outside_satisfied;
          continue;
        }
      }
      int idx = 0;
      for (int t = 0; t < d; ++t) idx = idx * nb[t] + c[t];
      up.push_back(block_mask[idx]);
    }
    if (violated_outside) continue;
    const std::uint32_t mask = block_mask[B];
    const int bsize = std::popcount(mask);
    for (std::uint32_t outer = 0; outer <= full; ++outer) {
      if (outer & mask) continue;
      bool ok = true;
      for (std::uint32_t u : up) ok = ok && (outer & u) != u;
      if (!ok) continue;
      double m1 = 0.0, m2 = 0.0;
      // Enumerate subsets of the block mask.
      std::uint32_t sub = 0;
      do {
        const double p = product_weight(sub, bsize, lf, le);
        const double v = values[outer | sub];
        m1 += p * v;
        m2 += p * v * v;
        sub = (sub - mask) & mask;
      } while (sub != 0);
      const double var = std::max(0.0, m2 - m1 * m1);
      total += product_weight(outer, n - bsize, lf, le) * var;
    }
  }
  return total;
}

double tau_reference(int d, int ell, double q) {
  const double l = ell;
  if (d == 1) return l * l / q;
  if (d == 2) return std::max(std::log(l), 1.0) * l * l / q;
  return std::pow(l, d) / q;
}

PathPoincareReport path_poincare_report(const TestFunction& f, int ell, const StateSpace& space) {
  const Volume& volume = space.volume;
  const BoxWindow window(volume, ell);
  std::uint32_t window_mask = 0;
  for (int s : window.sites()) window_mask |= 1u << s;
  const auto values = tabulate(f, volume);
  const auto masks = neighbour_masks(volume);
  const std::uint32_t origin_bit = 1u << volume.origin();
  const double q = space.q;

  PathPoincareReport r;
  r.vanishes_at_empty_origin = true;
  std::unordered_map<std::uint64_t, double> load;
  for (std::size_t i = 0; i < space.count(); ++i) {
    const std::uint32_t code = space.states[i];
    if (!(code & origin_bit) && values[code] != 0.0) r.vanishes_at_empty_origin = false;
    const bool chi = (code & window_mask) != window_mask;
    if (!chi) continue;
    r.lhs += space.weights[i] * values[code] * values[code];
    if (!(code & origin_bit)) continue;
    const ConfigPath path = config_path(volume, space.config(i), ell);
    const int j = static_cast<int>(path.steps.size());
    r.max_path_length = std::max(r.max_path_length, j);
    for (const auto& step : path.steps) {
      const auto a = static_cast<std::uint32_t>(step.before.to_index());
      const auto b = static_cast<std::uint32_t>(step.after.to_index());
      const std::uint64_t key = (static_cast<std::uint64_t>(std::min(a, b)) << 5) | static_cast<std::uint64_t>(step.site);
      load[key] += space.weights[i] * j;
    }
  }
  for (const auto& [key, mass] : load) {
    const auto low = static_cast<std::uint32_t>(key >> 5);
    const int site = static_cast<int>(key & 31u);
    const auto ia = space.index[low], ib = space.index[low ^ (1u << site)];
    if (ia < 0 || ib < 0 || !constrained(low, masks[site])) {
      throw StructuralError("configuration path uses a move outside the dynamics");
    }
    const double edge = q * (1.0 - q) * (space.weights[ia] + space.weights[ib]);
    r.congestion = std::max(r.congestion, mass / edge);
  }
  r.dirichlet = exact_moments(f, space).dirichlet;
  if (r.dirichlet > 0.0) r.ratio = r.lhs / r.dirichlet;
  else r.ratio = r.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  r.tau_ref = tau_reference(volume.dim(), ell, q);
  return r;
}

}  // namespace fa1f
