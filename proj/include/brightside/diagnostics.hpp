#pragma once

// Chain summaries: quantiles, Kolmogorov-Smirnov distance, autocorrelation and
// effective sample size, and Q-Q comparison reports.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "brightside/kernels.hpp"
#include "brightside/rng.hpp"

namespace brightside::diagnostics {

struct QuantileSpec {
  Vector probs;

  // 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 0.8, 0.9, 0.95, 0.98, 0.99
  static QuantileSpec standard();
  // Throws DomainError unless strictly increasing inside (0,1).
  void validate() const;
};

// Type-7 rule: linear interpolation of order statistics at rank p(n-1)+1.
double empirical_quantile(std::span<const double> samples, double p);
Vector empirical_quantiles(std::span<const double> samples, const QuantileSpec& spec);
// Same as above on data that is already sorted ascending.
Vector sorted_quantiles(std::span<const double> sorted, const QuantileSpec& spec);

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

// rho_0..rho_max_lag (biased estimator, FFT based).
Vector autocorrelation(std::span<const double> samples, std::size_t max_lag);

// n / (1 + 2 sum rho_k), truncated at the first non-positive pair sum
// rho_{2m} + rho_{2m+1}; clipped to [1, n].
double ess(std::span<const double> samples);

double standard_cauchy_cdf(double x);
double standard_cauchy_quantile(double p);

// |s - r| / max(|r|, floor); 0 when both are 0.
double relative_error(double sample, double reference, double floor = 0.0);

struct QQReport {
  std::size_t coordinate = 0;
  Vector probs;
  Vector sample_quantile;      // pooled over replicates
  Vector reference_quantile;
  Vector relative_error;
  Vector envelope_lo;          // min over replicates
  Vector envelope_hi;          // max over replicates
  std::vector<Vector> replicate_quantiles;
  double denominator_floor = 0.0;

  // Max relative error over entries with prob in [p_lo, p_hi].
  double max_relative_error(double p_lo = 0.0, double p_hi = 1.0) const;
};

QQReport qq_report(std::span<const kernels::ChainOutput> chains, std::size_t coordinate,
                   std::span<const double> reference_quantiles, const QuantileSpec& spec,
                   double denominator_floor = 0.0);
// Same report from replicate sample vectors (one coordinate each).
QQReport qq_report_from_samples(std::span<const Vector> replicates, std::size_t coordinate,
                                std::span<const double> reference_quantiles,
                                const QuantileSpec& spec, double denominator_floor = 0.0);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool overlaps(const Interval& o) const noexcept { return lo <= o.hi && o.lo <= hi; }
};

// Percentile interval of the p-quantile from a non-overlapping block bootstrap.
Interval bootstrap_quantile_interval(std::span<const double> samples, double p, double level,
                                     std::size_t replicates, std::size_t block_length, Rng& rng);

// ceil(2 n / ESS), at least 1.
std::size_t suggested_block_length(std::span<const double> samples);

}  // namespace brightside::diagnostics
