#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fa1f/core_model.hpp"
#include "fa1f/kmc.hpp"
#include "fa1f/meet.hpp"
#include "fa1f/montecarlo.hpp"

namespace fa1f {

/// One CSV row of a scan: q,value,stderr,n,label.
struct ScanRow {
  double q = 0.0;
  Estimate value;
  std::string label;
};

/// Max/min of value / model over a series, for the models used in summaries.
struct FlatnessReport {
  std::string model;
  double ratio = 0.0;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  std::optional<ScalingSeries> fit;  // fit of the headline series
  std::string fit_label;
  std::vector<FlatnessReport> flatness;
  std::vector<std::string> notes;    // extra comment lines
};

std::vector<ScalingPoint> series(const ScanResult& r, const std::string& label);

/// Box window side floor(1/q) unless fixed.
int gap_scan_side(double q, std::optional<int> ell);

/// Cluster test function on the box origin + {0..l-1}^d inside a box of side
/// l + 2, which reproduces the infinite-lattice constraints on the window.
/// Rows: gap_bound, variance, dirichlet, variance_scaled (Var / (q l^d)),
/// dirichlet_scaled (D q^(d-3)). Fit of gap_bound against q.
ScanResult gap_scan(int d, std::span<const double> qs, std::size_t samples, const McOptions& opts,
                    std::optional<int> ell = std::nullopt);

/// Variational lower bound mu(f)^2 / D(f) on E tau_0: f_one_d with
/// l = ceil(1/q) in d = 1, f_two_d with l = l_q in d = 2, f_origin in d >= 3.
ScanResult tau0_variational_scan(int d, std::span<const double> qs, std::size_t samples, const McOptions& opts,
                                 double q0 = 0.5, std::optional<int> ell = std::nullopt);

struct KmcSettings {
  double q0 = 0.5;                 // enters the default torus side
  std::optional<int> side;         // torus side override
  std::optional<double> t_max;     // censoring time override
};

/// KMC mean of tau_0 over non-frozen, uncensored runs on the d-torus. Every
/// run is also kept as a row labelled run, censored or frozen.
ScanResult tau0_kmc_scan(int d, std::span<const double> qs, std::size_t runs, const McOptions& opts,
                         const KmcSettings& settings);

struct PersistenceScanPoint {
  double q = 0.0;
  int side = 0;
  PersistenceCurve curve;
  RateFit fit;
};

struct PersistenceScan {
  ScanResult summary;  // rows: rate per q, fit of rate against q
  std::vector<PersistenceScanPoint> points;
};

/// Survival curves on an automatic grid: 60 equally spaced times up to the
/// time where the empirical survival drops below 0.005 (capped by t_max).
/// Initial states are drawn from mu_G so no trajectory starts frozen.
PersistenceScan persistence_scan(int d, std::span<const double> qs, std::size_t runs, const McOptions& opts,
                                 const KmcSettings& settings);

/// Survival curve on a grid from already simulated tau_0 samples.
PersistenceCurve survival_from_samples(std::span<const Tau0Sample> samples, std::span<const double> grid);
/// Grid of `points` times from 0 to the time where survival falls below `floor`.
std::vector<double> survival_grid(std::span<const Tau0Sample> samples, std::size_t points, double floor);

struct MeetScanPoint {
  double q = 0.0;
  int side = 0;
  double mean_tau = 0.0;
  double log_bound = 0.0;   // default log-distance variational bound
  double q_over_meet = 0.0;
  double residual = 0.0;
};

/// Meeting times on the torus (Z/lZ)^2 with l = ceil(c q^(-1/2)).
/// Rows: mean_tau, log_bound, q_over_meet; flatness of q_over_meet against q^2/log(1/q).
ScanResult meet_scan(std::span<const double> qs, double c = 1.0);

}  // namespace fa1f

namespace fa1f {

struct ExactRow {
  std::string quantity;  // gap, expected_tau0, mean, variance, dirichlet, gap_bound, tau0_bound
  std::string function;  // test function label, or "-" for model quantities
  double value = 0.0;
};

/// Exact diagnostics on a small volume under the conditioned measure: gap,
/// E tau_0, and moments plus variational ratios of every applicable test
/// function with window side ell.
std::vector<ExactRow> exact_table(const Volume& volume, double q, int ell);

}  // namespace fa1f
