#include "fa1f/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fa1f/errors.hpp"
#include "fa1f/parallel.hpp"

namespace fa1f {

Sampler product_sampler(const Volume& volume, double q) {
  const int n = volume.size();
  return [n, q](Rng& rng) {
    Configuration c(n);
    sample_config_into(c, q, rng);
    return c;
  };
}

Sampler conditioned_sampler(const Volume& volume, double q) {
  return [volume, q](Rng& rng) { return sample_config_conditioned(volume, q, rng); };
}

double dirichlet_integrand(const TestFunction& f, const Volume& volume, double q, const Configuration& eta) {
  if (f.dirichlet_integrand) return f.dirichlet_integrand(eta, q);
  if (f.support.empty()) return 0.0;
  thread_local std::vector<int> sites;
  thread_local std::vector<std::uint8_t> mark;
  sites.clear();
  mark.assign(static_cast<std::size_t>(volume.size()), 0);
  for (int x : f.support) {
    if (!mark[x]) sites.push_back(x), mark[x] = 1;
    for (int y : volume.neighbors(x)) {
      if (!mark[y]) sites.push_back(y), mark[y] = 1;
    }
  }
  Configuration work = eta;
  const double base = f.evaluate(eta);
  double total = 0.0;
  for (int x : sites) {
    if (!constraint(volume, eta, x)) continue;
    work.toggle(x);
    const double diff = f.evaluate(work) - base;
    work.toggle(x);
    total += diff * diff;
  }
  return total;
}

SampleSet collect_samples(const TestFunction& f, const Sampler& sampler, std::size_t n, const McOptions& opts,
                          const Volume* volume, double q) {
  if (volume) {
    for (int x : f.support) {
      if (x < 0 || x >= volume->size()) throw DomainError("test function support escapes the volume");
    }
  }
  const std::size_t block = std::max<std::size_t>(1, opts.block_size);
  const std::size_t blocks = (n + block - 1) / block;
  std::vector<SampleSet> parts(blocks);
  parallel_for(blocks, opts.threads, [&](std::size_t b) {
    Rng rng = make_stream(opts.seed, b);
    const std::size_t count = std::min(block, n - b * block);
    SampleSet& part = parts[b];
    part.f.reserve(count);
    if (volume) part.g.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const Configuration eta = sampler(rng);
      part.f.push_back(f.evaluate(eta));
      if (volume) part.g.push_back(dirichlet_integrand(f, *volume, q, eta));
    }
  });
  SampleSet out;
  out.f.reserve(n);
  if (volume) out.g.reserve(n);
  for (const auto& part : parts) {
    out.f.insert(out.f.end(), part.f.begin(), part.f.end());
    out.g.insert(out.g.end(), part.g.begin(), part.g.end());
  }
  return out;
}

namespace {

double mean_value(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

void require_samples(std::size_t n) {
  if (n < 2) throw PreconditionError("estimators need at least two samples");
}

// Delete-1 jackknife standard error of a statistic given its leave-one-out values.
double jackknife_error(std::span<const double> loo) {
  const double n = static_cast<double>(loo.size());
  const double m = mean_value(loo);
  double ss = 0.0;
  for (double t : loo) ss += (t - m) * (t - m);
  return std::sqrt((n - 1.0) / n * ss);
}

struct CenteredSums {
  double mean = 0.0;
  double s2 = 0.0;  // sum of squared deviations
};

CenteredSums centered(std::span<const double> x) {
  CenteredSums c;
  c.mean = mean_value(x);
  for (double v : x) c.s2 += (v - c.mean) * (v - c.mean);
  return c;
}

// Variance with sample i removed, from the full-sample centered sums.
double loo_variance(const CenteredSums& c, double xi, double n) {
  const double d = xi - c.mean;
  return (c.s2 - d * d * n / (n - 1.0)) / (n - 2.0);
}

}  // namespace

Estimate mean_of(std::span<const double> x) {
  require_samples(x.size());
  const auto c = centered(x);
  const double n = static_cast<double>(x.size());
  return {c.mean, std::sqrt(c.s2 / (n - 1.0) / n), x.size()};
}

Estimate variance_of(std::span<const double> x) {
  require_samples(x.size());
  const double n = static_cast<double>(x.size());
  const auto c = centered(x);
  const double var = c.s2 / (n - 1.0);
  if (x.size() < 3) return {var, std::numeric_limits<double>::infinity(), x.size()};
  // The leave-one-out variances are affine in the squared deviations.
  const double m2 = c.s2 / n;
  double ss = 0.0;
  for (double v : x) {
    const double t = (v - c.mean) * (v - c.mean) - m2;
    ss += t * t;
  }
  const double jack_var = n / ((n - 1.0) * (n - 2.0) * (n - 2.0)) * ss;
  return {var, std::sqrt(jack_var), x.size()};
}

Estimate mean_over_variance(std::span<const double> num, std::span<const double> den_values, double scale) {
  require_samples(num.size());
  if (num.size() != den_values.size()) throw PreconditionError("sample sets differ in length");
  const double n = static_cast<double>(num.size());
  const auto c = centered(den_values);
  const double var = c.s2 / (n - 1.0);
  if (!(var > 0.0)) throw DegenerateEstimate("variance estimate vanishes");
  const double g_sum = std::accumulate(num.begin(), num.end(), 0.0);
  const double value = scale * (g_sum / n) / var;
  if (num.size() < 3) return {value, std::numeric_limits<double>::infinity(), num.size()};
  std::vector<double> loo(num.size());
  for (std::size_t i = 0; i < num.size(); ++i) {
    const double v = loo_variance(c, den_values[i], n);
    const double g = (g_sum - num[i]) / (n - 1.0);
    loo[i] = v > 0.0 ? scale * g / v : std::numeric_limits<double>::infinity();
  }
  return {value, jackknife_error(loo), num.size()};
}

Estimate squared_mean_over_mean(std::span<const double> f, std::span<const double> g, double scale) {
  require_samples(f.size());
  if (f.size() != g.size()) throw PreconditionError("sample sets differ in length");
  const double n = static_cast<double>(f.size());
  const double f_sum = std::accumulate(f.begin(), f.end(), 0.0);
  const double g_sum = std::accumulate(g.begin(), g.end(), 0.0);
  if (!(g_sum > 0.0)) throw DegenerateEstimate("Dirichlet form estimate vanishes");
  const double fm = f_sum / n;
  const double value = fm * fm / (scale * g_sum / n);
  std::vector<double> loo(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = (f_sum - f[i]) / (n - 1.0);
    const double b = scale * (g_sum - g[i]) / (n - 1.0);
    loo[i] = b > 0.0 ? a * a / b : std::numeric_limits<double>::infinity();
  }
  return {value, jackknife_error(loo), f.size()};
}

Estimate estimate_mean(const TestFunction& f, const Sampler& sampler, std::size_t n, const McOptions& opts) {
  require_samples(n);
  return mean_of(collect_samples(f, sampler, n, opts).f);
}

Estimate estimate_variance(const TestFunction& f, const Sampler& sampler, std::size_t n, const McOptions& opts) {
  require_samples(n);
  return variance_of(collect_samples(f, sampler, n, opts).f);
}

Estimate estimate_dirichlet(const TestFunction& f, const Volume& volume, double q, std::size_t n,
                            const McOptions& opts) {
  return estimate_dirichlet(f, volume, q, product_sampler(volume, q), n, opts);
}

Estimate estimate_dirichlet(const TestFunction& f, const Volume& volume, double q, const Sampler& sampler,
                            std::size_t n, const McOptions& opts) {
  require_samples(n);
  const auto s = collect_samples(f, sampler, n, opts, &volume, q);
  Estimate e = mean_of(s.g);
  const double scale = q * (1.0 - q);
  return {scale * e.mean, scale * e.error, e.n};
}

Estimate gap_upper_bound(const TestFunction& f, const Volume& volume, double q, const Sampler& sampler,
                         std::size_t n, const McOptions& opts) {
  require_samples(n);
  const auto s = collect_samples(f, sampler, n, opts, &volume, q);
  return mean_over_variance(s.g, s.f, q * (1.0 - q));
}

void check_vanishes_at_empty_origin(const TestFunction& f, const Volume& volume, double q, std::size_t checks,
                                    std::uint64_t seed) {
  Rng rng = make_stream(seed, 0x5630ull);
  for (std::size_t i = 0; i < checks; ++i) {
    Configuration eta = sample_config(volume, q, rng);
    eta.set(volume.origin(), 0);
    if (f.evaluate(eta) != 0.0) {
      throw PreconditionError(f.label + " does not vanish when the origin is empty: " + eta.to_string());
    }
  }
}

Estimate tau0_lower_bound(const TestFunction& f, const Volume& volume, double q, const Sampler& sampler,
                          std::size_t n, const McOptions& opts) {
  require_samples(n);
  check_vanishes_at_empty_origin(f, volume, q, 1000, opts.seed);
  const auto s = collect_samples(f, sampler, n, opts, &volume, q);
  return squared_mean_over_mean(s.f, s.g, q * (1.0 - q));
}

MomentEstimates estimate_moments(const TestFunction& f, const Volume& volume, double q, const Sampler& sampler,
                                 std::size_t n, const McOptions& opts) {
  require_samples(n);
  MomentEstimates m;
  m.samples = collect_samples(f, sampler, n, opts, &volume, q);
  m.mean = mean_of(m.samples.f);
  m.variance = variance_of(m.samples.f);
  const Estimate g = mean_of(m.samples.g);
  const double scale = q * (1.0 - q);
  m.dirichlet = {scale * g.mean, scale * g.error, g.n};
  return m;
}

ScalingSeries fit_exponent(std::span<const ScalingPoint> points) {
  if (points.size() < 3) throw DomainError("fit_exponent: need at least three points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].value > 0.0)) throw DomainError("fit_exponent: values must be positive");
    if (!(points[i].q > 0.0) || !(points[i].weight > 0.0)) throw DomainError("fit_exponent: q and weights must be positive");
    if (i > 0 && !(points[i].q < points[i - 1].q)) throw DomainError("fit_exponent: q values must strictly decrease");
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (const auto& p : points) {
    sw += p.weight;
    sx += p.weight * std::log(p.q);
    sy += p.weight * std::log(p.value);
  }
  const double xm = sx / sw, ym = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    const double dx = std::log(p.q) - xm, dy = std::log(p.value) - ym;
    sxx += p.weight * dx * dx;
    sxy += p.weight * dx * dy;
    syy += p.weight * dy * dy;
  }
  ScalingSeries out;
  out.points.assign(points.begin(), points.end());
  out.slope = sxy / sxx;
  out.intercept = ym - out.slope * xm;
  double rss = 0.0;
  for (const auto& p : points) {
    const double r = std::log(p.value) - (out.intercept + out.slope * std::log(p.q));
    rss += p.weight * r * r;
  }
  // Effective number of points for the residual variance with relative weights.
  const double dof = static_cast<double>(points.size()) - 2.0;
  out.slope_err = std::sqrt(rss / dof / sxx);
  out.r2 = syy > 0.0 ? std::clamp(1.0 - rss / syy, 0.0, 1.0) : 1.0;
  return out;
}

double log_weight(const Estimate& e) {
  if (!(e.error > 0.0) || !(e.mean > 0.0)) return 1.0;
  const double rel = e.error / e.mean;
  return 1.0 / (rel * rel);
}

double flatness(std::span<const ScalingPoint> points, const std::function<double(double)>& model) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& p : points) {
    const double r = p.value / model(p.q);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return hi / lo;
}

}  // namespace fa1f
