#include "fa1f/testfn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <set>

#include "fa1f/errors.hpp"
#include "fa1f/meet.hpp"
#include "fa1f/paths.hpp"

namespace fa1f {

BoxWindow::BoxWindow(const Volume& volume, int ell) : ell_(ell) {
  if (volume.kind() == VolumeKind::graph) throw DomainError("box window needs a lattice volume");
  if (ell < 1) throw DomainError("box window side must be positive");
  const int d = volume.dim();
  const auto disp = box_displacements(d, ell);
  for (const Coord& x : disp) {
    auto s = volume.relative_site(x);
    if (!s) throw DomainError("box window of side " + std::to_string(ell) + " exceeds the volume");
    sites_.push_back(*s);
  }
  std::vector<int> sorted = sites_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("box window wraps onto itself");
  }
  // Local index of a displacement in the row-major enumeration.
  auto local = [&](const Coord& x) {
    int i = 0;
    for (int a = 0; a < d; ++a) i = i * ell + x[a];
    return i;
  };
  local_adj_.resize(disp.size());
  for (std::size_t i = 0; i < disp.size(); ++i) {
    for (int a = 0; a < d; ++a) {
      for (int step : {-1, 1}) {
        Coord y = disp[i];
        y[a] += step;
        if (y[a] >= 0 && y[a] < ell) local_adj_[i].push_back(local(y));
      }
    }
  }
}

BallWindow::BallWindow(const Volume& volume, int radius) : radius_(radius) {
  if (volume.kind() == VolumeKind::graph) throw DomainError("ball window needs a lattice volume");
  if (radius < 0) throw DomainError("ball radius must be nonnegative");
  const int d = volume.dim();
  Coord x(static_cast<std::size_t>(d), -radius);
  while (true) {
    const int n = l1_norm(x);
    if (n <= radius) {
      auto s = volume.relative_site(x);
      if (!s) throw DomainError("1-norm ball of radius " + std::to_string(radius) + " exceeds the volume");
      sites_.push_back(*s);
      norms_.push_back(n);
    }
    int a = d - 1;
    while (a >= 0 && ++x[a] > radius) x[a--] = -radius;
    if (a < 0) break;
  }
  std::vector<int> sorted = sites_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("1-norm ball wraps onto itself");
  }
}

namespace {

// Labels empty window sites by cluster (1-based), 0 for occupied. Returns the count.
int label_clusters(const BoxWindow& w, const Configuration& eta, std::vector<int>& label) {
  const auto& sites = w.sites();
  const int n = static_cast<int>(sites.size());
  label.assign(static_cast<std::size_t>(n), 0);
  thread_local std::vector<int> stack;
  int count = 0;
  for (int i = 0; i < n; ++i) {
    if (label[i] != 0 || !eta.empty_at(sites[i])) continue;
    ++count;
    label[i] = count;
    stack.assign(1, i);
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : w.local_neighbors(u)) {
        if (label[v] == 0 && eta.empty_at(sites[v])) {
          label[v] = count;
          stack.push_back(v);
        }
      }
    }
  }
  return count;
}

void require_dim(const Volume& volume, int d, const char* who) {
  if (volume.kind() == VolumeKind::graph || volume.dim() != d) {
    throw DomainError(std::string(who) + ": needs a " + std::to_string(d) + "-dimensional lattice volume");
  }
}

// Sites at displacement -r..r for d = 1, indexed by displacement + r.
std::vector<int> line_sites(const Volume& volume, int r, const char* who) {
  require_dim(volume, 1, who);
  std::vector<int> sites;
  for (int x = -r; x <= r; ++x) {
    auto s = volume.relative_site({x});
    if (!s) throw DomainError(std::string(who) + ": volume radius around the origin is below " + std::to_string(r));
    sites.push_back(*s);
  }
  std::vector<int> sorted = sites;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError(std::string(who) + ": volume too small, the window wraps onto itself");
  }
  return sites;
}

int one_d_value(const std::vector<int>& line, int ell, const Configuration& eta) {
  const int r = 2 * ell;
  int xi = -1;
  for (int k = 0; k < 2 * ell && xi < 0; ++k) {
    if (eta.empty_at(line[r + k]) || eta.empty_at(line[r - k])) xi = k;
  }
  if (xi < 0) return 0;
  return xi < ell ? xi : 2 * ell - xi;
}

double two_d_value(const BallWindow& ball, int ell, const Configuration& eta) {
  int best = ell;
  const auto& sites = ball.sites();
  const auto& norms = ball.norms();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (norms[i] < best && eta.empty_at(sites[i])) best = norms[i];
  }
  return std::log1p(static_cast<double>(best));
}

}  // namespace

int cluster_count(const BoxWindow& window, const Configuration& eta) {
  thread_local std::vector<int> label;
  return label_clusters(window, eta, label);
}

int cluster_count(const Volume& volume, const Configuration& eta, int ell) {
  return cluster_count(BoxWindow(volume, ell), eta);
}

int chi_ell(const Volume& volume, const Configuration& eta, int ell) {
  const BoxWindow w(volume, ell);
  for (int s : w.sites()) {
    if (eta.empty_at(s)) return 1;
  }
  return 0;
}

int f_one_d(const Volume& volume, const Configuration& eta, int ell) {
  if (ell < 1) throw DomainError("f_one_d: ell must be positive");
  return one_d_value(line_sites(volume, 2 * ell, "f_one_d"), ell, eta);
}

double f_two_d(const Volume& volume, const Configuration& eta, int ell) {
  require_dim(volume, 2, "f_two_d");
  if (ell < 1) throw DomainError("f_two_d: ell must be positive");
  return two_d_value(BallWindow(volume, ell), ell, eta);
}

int f_origin(const Volume& volume, const Configuration& eta) { return eta[volume.origin()]; }

double f_meet(const Configuration& eta, const MeetTable& meet) {
  const int n = meet.size();
  if (eta.size() != n) throw DomainError("f_meet: configuration does not live on the meeting-time graph");
  thread_local std::vector<int> empties;
  empties.clear();
  for (int x = 0; x < n; ++x) {
    if (eta.empty_at(x)) empties.push_back(x);
  }
  double best = 0.0;
  for (int x : empties) {
    for (int y : empties) best = std::max(best, meet.tau(x, y));
  }
  return best;
}

TestFunction make_cluster_count(const Volume& volume, int ell) {
  auto window = std::make_shared<const BoxWindow>(volume, ell);
  auto vol = std::make_shared<const Volume>(volume);
  TestFunction f;
  f.label = "cluster_count";
  f.support = window->sites();
  f.evaluate = [window](const Configuration& eta) { return static_cast<double>(cluster_count(*window, eta)); };
  // Emptying an occupied site x merges the k clusters adjacent to it into one,
  // so the count changes by 1 - k. The squared change is invariant under
  // flipping x, and so is c_x, hence mu(c_x diff^2) = mu(c_x diff^2 1{eta_x=1}) / (1-q).
  // Only occupied sites are visited, which needs a single labelling of eta.
  f.dirichlet_integrand = [window, vol](const Configuration& eta, double q) {
    thread_local std::vector<int> label;
    label_clusters(*window, eta, label);
    const auto& sites = window->sites();
    double total = 0.0;
    int distinct[16];
    for (std::size_t i = 0; i < sites.size(); ++i) {
      const int x = sites[i];
      if (eta.empty_at(x) || !constraint(*vol, eta, x)) continue;
      int k = 0;
      for (int j : window->local_neighbors(static_cast<int>(i))) {
        const int lab = label[j];
        if (lab == 0) continue;
        bool seen = false;
        for (int t = 0; t < k; ++t) seen = seen || distinct[t] == lab;
        if (!seen) distinct[k++] = lab;
      }
      const double delta = 1.0 - k;
      total += delta * delta;
    }
    return total / (1.0 - q);
  };
  return f;
}

TestFunction make_chi_ell(const Volume& volume, int ell) {
  auto window = std::make_shared<const BoxWindow>(volume, ell);
  TestFunction f;
  f.label = "chi_ell";
  f.support = window->sites();
  f.evaluate = [window](const Configuration& eta) {
    for (int s : window->sites()) {
      if (eta.empty_at(s)) return 1.0;
    }
    return 0.0;
  };
  return f;
}

TestFunction make_f_one_d(const Volume& volume, int ell) {
  if (ell < 1) throw DomainError("f_one_d: ell must be positive");
  auto line = std::make_shared<const std::vector<int>>(line_sites(volume, 2 * ell, "f_one_d"));
  TestFunction f;
  f.label = "f_one_d";
  // Sites at distance 2 ell never change the value.
  f.support.assign(line->begin() + 1, line->end() - 1);
  f.evaluate = [line, ell](const Configuration& eta) { return static_cast<double>(one_d_value(*line, ell, eta)); };
  return f;
}

TestFunction make_f_two_d(const Volume& volume, int ell) {
  require_dim(volume, 2, "f_two_d");
  if (ell < 1) throw DomainError("f_two_d: ell must be positive");
  auto ball = std::make_shared<const BallWindow>(volume, ell);
  TestFunction f;
  f.label = "f_two_d";
  f.support = ball->sites();
  f.evaluate = [ball, ell](const Configuration& eta) { return two_d_value(*ball, ell, eta); };
  return f;
}

TestFunction make_f_origin(const Volume& volume) {
  const int origin = volume.origin();
  TestFunction f;
  f.label = "f_origin";
  f.support = {origin};
  f.evaluate = [origin](const Configuration& eta) { return static_cast<double>(eta[origin]); };
  return f;
}

TestFunction make_f_meet(const MeetTable& meet) {
  auto table = std::make_shared<const MeetTable>(meet);
  TestFunction f;
  f.label = "f_meet";
  f.support.resize(static_cast<std::size_t>(table->size()));
  for (int x = 0; x < table->size(); ++x) f.support[static_cast<std::size_t>(x)] = x;
  f.evaluate = [table](const Configuration& eta) { return f_meet(eta, *table); };
  return f;
}

TestFunction make_constant(double value) {
  TestFunction f;
  f.label = "constant";
  f.evaluate = [value](const Configuration&) { return value; };
  return f;
}

TestFunction scaled(const TestFunction& f, double c) {
  TestFunction g = f;
  g.label = f.label + "_scaled";
  auto inner = f.evaluate;
  g.evaluate = [inner, c](const Configuration& eta) { return c * inner(eta); };
  if (f.dirichlet_integrand) {
    auto integrand = f.dirichlet_integrand;
    g.dirichlet_integrand = [integrand, c](const Configuration& eta, double q) { return c * c * integrand(eta, q); };
  }
  return g;
}

}  // namespace fa1f
