#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fa1f/rng.hpp"

namespace fa1f {

/// Integer lattice vector. Also used for displacements relative to a volume origin.
using Coord = std::vector<int>;

struct Parameters {
  double q = 0.1;   // vacancy density
  int d = 1;        // dimension
  double q0 = 0.5;  // reference density entering the critical length
  int ell = 1;      // box side

  /// Throws DomainError when any field is outside its admissible range.
  void validate() const;
};

enum class VolumeKind { box, torus, graph };

/// A finite set of sites with a nearest-neighbour adjacency.
///
/// Boxes carry the filled boundary condition: sites outside the box are
/// occupied, so they never enable a constraint and simply do not appear in the
/// adjacency. Tori wrap around every axis. Graphs take their adjacency from an
/// edge list. Box and torus sites are indexed row-major, first axis slowest.
///
/// Every volume has a distinguished origin site; windows such as the box
/// {0,...,l-1}^d or the 1-norm ball are placed relative to it.
class Volume {
 public:
  static Volume box(std::vector<int> extents, Coord origin = {});
  static Volume torus(std::vector<int> extents, Coord origin = {});
  static Volume graph(int n, std::span<const std::pair<int, int>> edges, int origin = 0);

  Volume with_origin(const Coord& origin) const;

  VolumeKind kind() const { return kind_; }
  bool periodic() const { return kind_ == VolumeKind::torus; }
  int size() const { return size_; }
  /// Lattice dimension; 0 for graphs.
  int dim() const { return static_cast<int>(extents_.size()); }
  const std::vector<int>& extents() const { return extents_; }

  std::span<const int> neighbors(int site) const {
    return {adjacency_.data() + offsets_[site], adjacency_.data() + offsets_[site + 1]};
  }
  int degree(int site) const { return offsets_[site + 1] - offsets_[site]; }
  int edge_count() const { return static_cast<int>(adjacency_.size()) / 2; }

  int origin() const { return origin_; }
  Coord origin_coords() const;

  Coord coords(int site) const;
  /// Site at absolute lattice coordinates. Tori wrap; boxes return nullopt outside.
  std::optional<int> site_at(const Coord& c) const;
  /// Site at origin + displacement. For graphs only the zero displacement is defined.
  std::optional<int> relative_site(const Coord& displacement) const;

  void check_site(int site) const;
  std::string describe() const;

  /// Same volume with sites relabelled: new index of old site s is perm[s].
  /// The result is a graph volume; used to check labelling invariance.
  Volume relabelled(std::span<const int> perm) const;

 private:
  Volume() = default;
  void build_lattice_adjacency();
  void set_adjacency(const std::vector<std::vector<int>>& lists);

  VolumeKind kind_ = VolumeKind::box;
  std::vector<int> extents_;
  int size_ = 0;
  int origin_ = 0;
  std::vector<int> offsets_;
  std::vector<int> adjacency_;
};

/// Occupancy per site: 1 occupied, 0 empty.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(int n, std::uint8_t fill = 1) : bits_(static_cast<std::size_t>(n), fill) {}
  static Configuration from_string(std::string_view s);
  /// Bit i of index is the occupancy of site i.
  static Configuration from_index(int n, std::uint64_t index);

  int size() const { return static_cast<int>(bits_.size()); }
  std::uint8_t operator[](int site) const { return bits_[static_cast<std::size_t>(site)]; }
  bool empty_at(int site) const { return bits_[static_cast<std::size_t>(site)] == 0; }
  void set(int site, std::uint8_t value) { bits_[static_cast<std::size_t>(site)] = value; }
  void toggle(int site) { bits_[static_cast<std::size_t>(site)] ^= 1u; }

  int vacancies() const;
  std::uint64_t to_index() const;
  std::string to_string() const;
  std::span<const std::uint8_t> bits() const { return bits_; }

  auto operator<=>(const Configuration&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// 1 iff some neighbour of the site is empty.
bool constraint(const Volume& volume, const Configuration& config, int site);

/// The configuration equal to config off site and different at site.
Configuration flip(const Configuration& config, int site);

/// Smallest integer not below (log(1-q0)/log(1-q))^(1/d).
int critical_length(double q, double q0, int d);

/// Product Bernoulli measure, each site empty with probability q.
Configuration sample_config(const Volume& volume, double q, Rng& rng);
void sample_config_into(Configuration& config, double q, Rng& rng);

/// Product measure conditioned on at least one vacancy.
Configuration sample_config_conditioned(const Volume& volume, double q, Rng& rng);

/// Edge-list reader: first line "n m", then m lines "u v" with 0-based ids.
Volume read_edge_list(std::istream& in);
void write_config(std::ostream& out, const Configuration& config);
Configuration read_config(std::istream& in);

}  // namespace fa1f
