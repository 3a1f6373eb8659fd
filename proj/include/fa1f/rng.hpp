#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fa1f {

using Rng = std::mt19937_64;

/// Independent stream keyed by (seed, stream index). Streams for different
/// indices do not depend on the order in which they are created, so replicas
/// can be scheduled on any number of workers and still reproduce bit for bit.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x46413166u};
  return Rng(seq);
}

/// Integer threshold t such that P(rng() < t) = p for a full-range 64-bit draw.
class BernoulliThreshold {
 public:
  explicit BernoulliThreshold(double p) : p_(p) {
    if (p <= 0.0) {
      always_false_ = true;
    } else if (p >= 1.0) {
      always_true_ = true;
    } else {
      threshold_ = static_cast<std::uint64_t>(std::ldexp(p, 64));
    }
  }

  bool operator()(Rng& rng) const {
    if (always_false_) return false;
    if (always_true_) return true;
    return rng() < threshold_;
  }

  double probability() const { return p_; }

 private:
  double p_;
  std::uint64_t threshold_ = 0;
  bool always_false_ = false;
  bool always_true_ = false;
};

/// Uniform double in (0, 1], safe to take the logarithm of.
inline double uniform_open_left(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

inline double exponential(Rng& rng, double rate) { return -std::log(uniform_open_left(rng)) / rate; }

}  // namespace fa1f
