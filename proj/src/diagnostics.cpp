#include "brightside/diagnostics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <limits>
#include <numeric>
#include <string>

#include "brightside/error.hpp"

namespace brightside::diagnostics {

QuantileSpec QuantileSpec::standard() {
  return {{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 0.8, 0.9, 0.95, 0.98, 0.99}};
}

void QuantileSpec::validate() const {
  if (probs.empty()) throw Error(ErrorCode::EmptyInput, "no quantile probabilities");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] > 0.0 && probs[i] < 1.0))
      throw Error(ErrorCode::DomainError, "quantile probabilities must lie in (0,1)");
    if (i > 0 && !(probs[i] > probs[i - 1]))
      throw Error(ErrorCode::DomainError, "quantile probabilities must be strictly increasing");
  }
}

namespace {

double type7(std::span<const double> sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void require_samples(std::span<const double> samples, std::size_t min_count) {
  if (samples.size() < min_count)
    throw Error(ErrorCode::EmptyInput, "need at least " + std::to_string(min_count) + " samples");
}

// FFTW planner calls are not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

double empirical_quantile(std::span<const double> samples, double p) {
  require_samples(samples, 2);
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::DomainError, "p must lie in [0,1]");
  Vector sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return type7(sorted, p);
}

Vector sorted_quantiles(std::span<const double> sorted, const QuantileSpec& spec) {
  require_samples(sorted, 2);
  spec.validate();
  Vector out;
  out.reserve(spec.probs.size());
  for (double p : spec.probs) out.push_back(type7(sorted, p));
  return out;
}

Vector empirical_quantiles(std::span<const double> samples, const QuantileSpec& spec) {
  require_samples(samples, 2);
  Vector sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantiles(sorted, spec);
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  require_samples(samples, 1);
  Vector sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    stat = std::max({stat, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return stat;
}

Vector autocorrelation(std::span<const double> samples, std::size_t max_lag) {
  require_samples(samples, 2);
  const std::size_t n = samples.size();
  max_lag = std::min(max_lag, n - 1);
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);

  std::size_t len = 1;
  while (len < 2 * n) len <<= 1;
  const std::size_t nc = len / 2 + 1;
  double* buf = fftw_alloc_real(len);
  fftw_complex* spec = fftw_alloc_complex(nc);
  fftw_plan fwd, inv;
  {
    std::lock_guard lock(planner_mutex());
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(len), buf, spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(len), spec, buf, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < len; ++i) buf[i] = i < n ? samples[i] - mean : 0.0;
  fftw_execute(fwd);
  for (std::size_t k = 0; k < nc; ++k) {
    spec[k][0] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    spec[k][1] = 0.0;
  }
  fftw_execute(inv);
  Vector rho(max_lag + 1, 0.0);
  const double c0 = buf[0];
  if (c0 > 0.0) {
    for (std::size_t k = 0; k <= max_lag; ++k) rho[k] = buf[k] / c0;
  } else {
    std::fill(rho.begin(), rho.end(), 1.0);
  }
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  fftw_free(buf);
  fftw_free(spec);
  return rho;
}

double ess(std::span<const double> samples) {
  require_samples(samples, 10);
  const std::size_t n = samples.size();
  const Vector rho = autocorrelation(samples, n - 1);
  const double nn = static_cast<double>(n);
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) return 1.0;
  // tau = -rho_0 + 2 sum_m (rho_{2m} + rho_{2m+1}) over the initial positive sequence.
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 < rho.size(); ++m) {
    const double pair = rho[2 * m] + rho[2 * m + 1];
    if (!(pair > 0.0)) break;
    tau += 2.0 * pair;
  }
  return std::clamp(nn / tau, 1.0, nn);
}

double standard_cauchy_cdf(double x) { return 0.5 + std::atan(x) / std::numbers::pi; }

double standard_cauchy_quantile(double p) { return std::tan(std::numbers::pi * (p - 0.5)); }

double relative_error(double sample, double reference, double floor) {
  const double diff = std::fabs(sample - reference);
  if (diff == 0.0) return 0.0;
  return diff / std::max(std::fabs(reference), floor);
}

double QQReport::max_relative_error(double p_lo, double p_hi) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (probs[i] >= p_lo - 1e-12 && probs[i] <= p_hi + 1e-12)
      worst = std::max(worst, relative_error[i]);
  return worst;
}

QQReport qq_report_from_samples(std::span<const Vector> replicates, std::size_t coordinate,
                                std::span<const double> reference_quantiles,
                                const QuantileSpec& spec, double denominator_floor) {
  if (replicates.empty()) throw Error(ErrorCode::EmptyInput, "no replicates");
  spec.validate();
  if (reference_quantiles.size() != spec.probs.size())
    throw Error(ErrorCode::DimensionMismatch, "reference quantiles do not match the spec");
  QQReport r;
  r.coordinate = coordinate;
  r.probs = spec.probs;
  r.reference_quantile.assign(reference_quantiles.begin(), reference_quantiles.end());
  r.denominator_floor = denominator_floor;
  Vector pooled;
  for (const Vector& rep : replicates) {
    r.replicate_quantiles.push_back(empirical_quantiles(rep, spec));
    pooled.insert(pooled.end(), rep.begin(), rep.end());
  }
  r.sample_quantile = empirical_quantiles(pooled, spec);
  const std::size_t m = spec.probs.size();
  r.relative_error.resize(m);
  r.envelope_lo.assign(m, std::numeric_limits<double>::infinity());
  r.envelope_hi.assign(m, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < m; ++i) {
    r.relative_error[i] = relative_error(r.sample_quantile[i], r.reference_quantile[i],
                                         denominator_floor);
    for (const Vector& q : r.replicate_quantiles) {
      r.envelope_lo[i] = std::min(r.envelope_lo[i], q[i]);
      r.envelope_hi[i] = std::max(r.envelope_hi[i], q[i]);
    }
  }
  return r;
}

QQReport qq_report(std::span<const kernels::ChainOutput> chains, std::size_t coordinate,
                   std::span<const double> reference_quantiles, const QuantileSpec& spec,
                   double denominator_floor) {
  if (chains.empty()) throw Error(ErrorCode::EmptyInput, "no chains");
  std::vector<Vector> reps;
  reps.reserve(chains.size());
  for (const auto& c : chains) {
    if (coordinate >= c.dim)
      throw Error(ErrorCode::DimensionMismatch, "coordinate outside the chain dimension");
    reps.push_back(c.coordinate(coordinate));
  }
  return qq_report_from_samples(reps, coordinate, reference_quantiles, spec, denominator_floor);
}

Interval bootstrap_quantile_interval(std::span<const double> samples, double p, double level,
                                     std::size_t replicates, std::size_t block_length, Rng& rng) {
  require_samples(samples, 2);
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::DomainError, "level in (0,1)");
  const std::size_t n = samples.size();
  block_length = std::clamp<std::size_t>(block_length, 1, n);
  const std::size_t blocks = n / block_length;
  std::uniform_int_distribution<std::size_t> pick(0, blocks - 1);
  Vector boot(blocks * block_length);
  Vector stats;
  stats.reserve(replicates);
  for (std::size_t r = 0; r < replicates; ++r) {
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t src = pick(rng) * block_length;
      std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(src), block_length,
                  boot.begin() + static_cast<std::ptrdiff_t>(b * block_length));
    }
    const double h = p * static_cast<double>(boot.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    std::nth_element(boot.begin(), boot.begin() + static_cast<std::ptrdiff_t>(lo), boot.end());
    const double a = boot[lo];
    double b = a;
    if (lo + 1 < boot.size())
      b = *std::min_element(boot.begin() + static_cast<std::ptrdiff_t>(lo + 1), boot.end());
    stats.push_back(a + (h - static_cast<double>(lo)) * (b - a));
  }
  std::sort(stats.begin(), stats.end());
  const double tail = 0.5 * (1.0 - level);
  return {type7(stats, tail), type7(stats, 1.0 - tail)};
}

std::size_t suggested_block_length(std::span<const double> samples) {
  const double e = ess(samples);
  return static_cast<std::size_t>(std::ceil(2.0 * static_cast<double>(samples.size()) / e));
}

}  // namespace brightside::diagnostics
