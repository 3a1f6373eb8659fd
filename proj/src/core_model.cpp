#include "fa1f/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fa1f/errors.hpp"

namespace fa1f {

void Parameters::validate() const {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0,1)");
  if (!(q0 > 0.0 && q0 < 1.0)) throw DomainError("q0 must lie in (0,1)");
  if (d < 1) throw DomainError("dimension must be at least 1");
  if (ell < 1) throw DomainError("box side must be at least 1");
}

// ---------------------------------------------------------------------------
// Volume

Volume Volume::box(std::vector<int> extents, Coord origin) {
  Volume v;
  v.kind_ = VolumeKind::box;
  v.extents_ = std::move(extents);
  v.build_lattice_adjacency();
  if (!origin.empty()) v = v.with_origin(origin);
  return v;
}

Volume Volume::torus(std::vector<int> extents, Coord origin) {
  Volume v;
  v.kind_ = VolumeKind::torus;
  v.extents_ = std::move(extents);
  v.build_lattice_adjacency();
  if (!origin.empty()) v = v.with_origin(origin);
  return v;
}

Volume Volume::graph(int n, std::span<const std::pair<int, int>> edges, int origin) {
  if (n < 1) throw DomainError("graph needs at least one vertex");
  Volume v;
  v.kind_ = VolumeKind::graph;
  v.size_ = n;
  std::vector<std::vector<int>> lists(static_cast<std::size_t>(n));
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw std::out_of_range("edge endpoint out of range");
    if (a == b) throw DomainError("self-loops are not allowed");
    lists[a].push_back(b);
    lists[b].push_back(a);
  }
  v.set_adjacency(lists);
  if (origin < 0 || origin >= n) throw std::out_of_range("origin vertex out of range");
  v.origin_ = origin;
  return v;
}

void Volume::build_lattice_adjacency() {
  if (extents_.empty()) throw DomainError("lattice volume needs at least one axis");
  size_ = 1;
  for (int e : extents_) {
    if (e < 1) throw DomainError("extents must be at least 1");
    size_ *= e;
  }
  const int d = dim();
  std::vector<std::vector<int>> lists(static_cast<std::size_t>(size_));
  for (int s = 0; s < size_; ++s) {
    Coord c = coords(s);
    for (int a = 0; a < d; ++a) {
      for (int step : {-1, 1}) {
        Coord n = c;
        n[a] += step;
        if (auto t = site_at(n); t && *t != s) lists[s].push_back(*t);
      }
    }
  }
  set_adjacency(lists);
}

void Volume::set_adjacency(const std::vector<std::vector<int>>& lists) {
  offsets_.assign(lists.size() + 1, 0);
  adjacency_.clear();
  for (std::size_t s = 0; s < lists.size(); ++s) {
    std::vector<int> l = lists[s];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    adjacency_.insert(adjacency_.end(), l.begin(), l.end());
    offsets_[s + 1] = static_cast<int>(adjacency_.size());
  }
}

Volume Volume::with_origin(const Coord& origin) const {
  if (kind_ == VolumeKind::graph) {
    if (origin.size() != 1) throw DomainError("graph origin is a single vertex id");
    check_site(origin[0]);
    Volume v = *this;
    v.origin_ = origin[0];
    return v;
  }
  if (static_cast<int>(origin.size()) != dim()) throw DomainError("origin dimension mismatch");
  for (int a = 0; a < dim(); ++a) {
    if (origin[a] < 0 || origin[a] >= extents_[a]) throw DomainError("origin outside the volume");
  }
  Volume v = *this;
  v.origin_ = *site_at(origin);
  return v;
}

Coord Volume::origin_coords() const {
  if (kind_ == VolumeKind::graph) return {origin_};
  return coords(origin_);
}

Coord Volume::coords(int site) const {
  if (kind_ == VolumeKind::graph) return {site};
  Coord c(extents_.size());
  for (int a = dim() - 1; a >= 0; --a) {
    c[a] = site % extents_[a];
    site /= extents_[a];
  }
  return c;
}

std::optional<int> Volume::site_at(const Coord& c) const {
  if (kind_ == VolumeKind::graph) {
    if (c.size() != 1 || c[0] < 0 || c[0] >= size_) return std::nullopt;
    return c[0];
  }
  if (static_cast<int>(c.size()) != dim()) return std::nullopt;
  int s = 0;
  for (int a = 0; a < dim(); ++a) {
    int x = c[a];
    if (kind_ == VolumeKind::torus) {
      x %= extents_[a];
      if (x < 0) x += extents_[a];
    } else if (x < 0 || x >= extents_[a]) {
      return std::nullopt;
    }
    s = s * extents_[a] + x;
  }
  return s;
}

std::optional<int> Volume::relative_site(const Coord& displacement) const {
  if (kind_ == VolumeKind::graph) {
    if (std::all_of(displacement.begin(), displacement.end(), [](int x) { return x == 0; })) return origin_;
    return std::nullopt;
  }
  if (static_cast<int>(displacement.size()) != dim()) return std::nullopt;
  Coord c = coords(origin_);
  for (int a = 0; a < dim(); ++a) c[a] += displacement[a];
  return site_at(c);
}

void Volume::check_site(int site) const {
  if (site < 0 || site >= size_) throw std::out_of_range("site index " + std::to_string(site) + " out of range");
}

std::string Volume::describe() const {
  std::ostringstream os;
  if (kind_ == VolumeKind::graph) {
    os << "graph(n=" << size_ << ",m=" << edge_count() << ")";
    return os.str();
  }
  os << (kind_ == VolumeKind::box ? "box(" : "torus(");
  for (int a = 0; a < dim(); ++a) os << (a ? "x" : "") << extents_[a];
  os << ")";
  return os.str();
}

Volume Volume::relabelled(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != size_) throw DomainError("permutation size mismatch");
  std::vector<std::pair<int, int>> edges;
  for (int s = 0; s < size_; ++s) {
    for (int t : neighbors(s)) {
      if (s < t) edges.emplace_back(perm[s], perm[t]);
    }
  }
  return graph(size_, edges, perm[origin_]);
}

// ---------------------------------------------------------------------------
// Configuration

Configuration Configuration::from_string(std::string_view s) {
  Configuration c(static_cast<int>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw DomainError("configuration strings contain only 0 and 1");
    c.bits_[i] = static_cast<std::uint8_t>(s[i] - '0');
  }
  return c;
}

Configuration Configuration::from_index(int n, std::uint64_t index) {
  Configuration c(n, 0);
  for (int i = 0; i < n; ++i) c.bits_[i] = static_cast<std::uint8_t>((index >> i) & 1u);
  return c;
}

int Configuration::vacancies() const {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), std::uint8_t{0}));
}

std::uint64_t Configuration::to_index() const {
  if (bits_.size() > 64) throw ResourceError("configuration too large for an integer index");
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) idx |= static_cast<std::uint64_t>(bits_[i] & 1u) << i;
  return idx;
}

std::string Configuration::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) s[i] = static_cast<char>('0' + bits_[i]);
  return s;
}

// ---------------------------------------------------------------------------

bool constraint(const Volume& volume, const Configuration& config, int site) {
  volume.check_site(site);
  for (int y : volume.neighbors(site)) {
    if (config.empty_at(y)) return true;
  }
  return false;
}

Configuration flip(const Configuration& config, int site) {
  if (site < 0 || site >= config.size()) throw std::out_of_range("flip: site out of range");
  Configuration out = config;
  out.toggle(site);
  return out;
}

int critical_length(double q, double q0, int d) {
  if (!(q > 0.0 && q < 1.0) || !(q0 > 0.0 && q0 < 1.0)) throw DomainError("critical_length: q and q0 must lie in (0,1)");
  if (d < 1) throw DomainError("critical_length: dimension must be at least 1");
  const double x = std::pow(std::log1p(-q0) / std::log1p(-q), 1.0 / d);
  // Absorb rounding so that exact integers (q == q0 gives 1) are not pushed up.
  return std::max(1, static_cast<int>(std::ceil(x * (1.0 - 1e-12))));
}

void sample_config_into(Configuration& config, double q, Rng& rng) {
  const BernoulliThreshold empty(q);
  for (int i = 0; i < config.size(); ++i) config.set(i, empty(rng) ? 0 : 1);
}

Configuration sample_config(const Volume& volume, double q, Rng& rng) {
  Configuration c(volume.size());
  sample_config_into(c, q, rng);
  return c;
}

Configuration sample_config_conditioned(const Volume& volume, double q, Rng& rng) {
  Configuration c(volume.size());
  if (q >= 1.0) {
    sample_config_into(c, q, rng);
    return c;
  }
  if (q <= 0.0) throw DomainError("conditioning on a vacancy requires q > 0");
  constexpr int kMaxRejections = 200;
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    sample_config_into(c, q, rng);
    if (c.vacancies() > 0) return c;
  }
  // Exact conditional draw: the index of the first vacancy is a geometric
  // variable truncated to the volume; sites before it are occupied, it is
  // empty, and sites after it are independent.
  const int n = volume.size();
  const double total = -std::expm1(n * std::log1p(-q));
  double u = uniform_open_left(rng) * total;
  int first = n - 1;
  double cumulative = 0.0;
  double occupied_prefix = 1.0;
  for (int k = 0; k < n; ++k) {
    cumulative += occupied_prefix * q;
    if (u <= cumulative) {
      first = k;
      break;
    }
    occupied_prefix *= (1.0 - q);
  }
  const BernoulliThreshold empty(q);
  for (int k = 0; k < n; ++k) {
    if (k < first) c.set(k, 1);
    else if (k == first) c.set(k, 0);
    else c.set(k, empty(rng) ? 0 : 1);
  }
  return c;
}

Volume read_edge_list(std::istream& in) {
  int n = 0, m = 0;
  if (!(in >> n >> m)) throw DomainError("edge list: expected header \"n m\"");
  if (n < 1 || m < 0) throw DomainError("edge list: invalid header");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    int u = 0, v = 0;
    if (!(in >> u >> v)) throw DomainError("edge list: expected " + std::to_string(m) + " edges");
    edges.emplace_back(u, v);
  }
  return Volume::graph(n, edges);
}

void write_config(std::ostream& out, const Configuration& config) { out << config.to_string() << '\n'; }

Configuration read_config(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("configuration dump is empty");
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
  return Configuration::from_string(line);
}

}  // namespace fa1f
