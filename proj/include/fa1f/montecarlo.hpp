#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fa1f/core_model.hpp"
#include "fa1f/testfn.hpp"

namespace fa1f {

/// Monte Carlo value with its standard error.
struct Estimate {
  double mean = 0.0;
  double error = 0.0;  // standard error
  std::size_t n = 0;
};

using Sampler = std::function<Configuration(Rng&)>;

Sampler product_sampler(const Volume& volume, double q);
Sampler conditioned_sampler(const Volume& volume, double q);

/// Samples are drawn in fixed-size blocks; block b uses stream (seed, b).
/// Results depend on the seed and block size only, not on the thread count.
struct McOptions {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t block_size = 2048;
};

/// Per-sample values of f and, optionally, of the Dirichlet integrand.
struct SampleSet {
  std::vector<double> f;
  std::vector<double> g;  // sum_x c_x (f(eta^x) - f(eta))^2, or the function's fast integrand
};

SampleSet collect_samples(const TestFunction& f, const Sampler& sampler, std::size_t n, const McOptions& opts,
                          const Volume* volume = nullptr, double q = 0.0);

/// Integrand for the Dirichlet estimator: sum over the support and its
/// neighbour shell of c_x (f(eta^x) - f(eta))^2. Uses f's fast integrand when set.
double dirichlet_integrand(const TestFunction& f, const Volume& volume, double q, const Configuration& eta);

// Statistics on stored samples.
Estimate mean_of(std::span<const double> x);
/// Unbiased sample variance, delete-1 jackknife standard error.
Estimate variance_of(std::span<const double> x);
/// scale * mean(num) / var(den_values), delete-1 jackknife standard error.
Estimate mean_over_variance(std::span<const double> num, std::span<const double> den_values, double scale);
/// mean(f)^2 / (scale * mean(g)), delete-1 jackknife standard error.
Estimate squared_mean_over_mean(std::span<const double> f, std::span<const double> g, double scale);

Estimate estimate_mean(const TestFunction& f, const Sampler& sampler, std::size_t n, const McOptions& opts);
Estimate estimate_variance(const TestFunction& f, const Sampler& sampler, std::size_t n, const McOptions& opts);
/// D(f) = q(1-q) sum_x mu(c_x (f(eta^x) - f(eta))^2) under the sampler's law
/// (the product measure on the volume unless a sampler is given).
Estimate estimate_dirichlet(const TestFunction& f, const Volume& volume, double q, std::size_t n,
                            const McOptions& opts);
Estimate estimate_dirichlet(const TestFunction& f, const Volume& volume, double q, const Sampler& sampler,
                            std::size_t n, const McOptions& opts);
/// D(f) / Var(f). Throws DegenerateEstimate when the variance estimate vanishes.
Estimate gap_upper_bound(const TestFunction& f, const Volume& volume, double q, const Sampler& sampler,
                         std::size_t n, const McOptions& opts);
/// mu(f)^2 / D(f) for f vanishing when the origin is empty. Throws
/// PreconditionError when f fails that check, DegenerateEstimate when D = 0.
Estimate tau0_lower_bound(const TestFunction& f, const Volume& volume, double q, const Sampler& sampler,
                          std::size_t n, const McOptions& opts);

/// Every estimate above from a single sample set.
struct MomentEstimates {
  Estimate mean;
  Estimate variance;
  Estimate dirichlet;
  SampleSet samples;
};
MomentEstimates estimate_moments(const TestFunction& f, const Volume& volume, double q, const Sampler& sampler,
                                 std::size_t n, const McOptions& opts);

/// Checks f(eta) = 0 whenever the origin is empty on `checks` sampled
/// configurations with the origin forced empty. Throws PreconditionError.
void check_vanishes_at_empty_origin(const TestFunction& f, const Volume& volume, double q, std::size_t checks,
                                    std::uint64_t seed);

struct ScalingPoint {
  double q = 0.0;
  double value = 0.0;
  double weight = 1.0;
};

struct ScalingSeries {
  std::vector<ScalingPoint> points;
  double slope = 0.0;
  double slope_err = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Weighted least squares of log(value) on log(q).
ScalingSeries fit_exponent(std::span<const ScalingPoint> points);

/// Weight 1/var(log value) from an estimate, or 1 when the error is zero.
double log_weight(const Estimate& e);

/// max/min of value_i / model(q_i).
double flatness(std::span<const ScalingPoint> points, const std::function<double(double)>& model);

}  // namespace fa1f
