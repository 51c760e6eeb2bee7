#pragma once

// Built-in target distributions. All log-densities are unnormalized.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "brightside/rng.hpp"

namespace brightside {

using Vector = std::vector<double>;

// Behavioral contract for a target density on R^d. Implementations must be
// re-entrant: the samplers call them from several threads at once.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual std::size_t dim() const noexcept = 0;
  virtual std::string name() const = 0;
  virtual double log_density(std::span<const double> y) const = 0;

  virtual bool has_gradient() const noexcept { return false; }
  // Writes grad log pi(y) into `grad` and returns log pi(y).
  virtual double log_density_and_gradient(std::span<const double> y,
                                          std::span<double> grad) const;

  virtual bool has_exact_sampler() const noexcept { return false; }
  virtual Vector exact_sample(Rng& rng) const;

  Vector grad_log_density(std::span<const double> y) const;
};

using TargetPtr = std::shared_ptr<const TargetModel>;

namespace targets {

// Multivariate Student-t with spherical scale:
//   log pi(y) = -(nu+d)/2 log(1 + |(y-loc)/scale|^2 / nu).
// nu = 1 is the multivariate Cauchy.
TargetPtr mv_student_t(std::size_t d, double nu, Vector loc, double scale);
TargetPtr standard_cauchy(std::size_t d);

struct SkewTParams {
  Vector xi;          // location
  Vector alpha_skew;  // skewness; scale matrix is the identity
  double nu = 1.0;

  std::size_t dim() const noexcept { return xi.size(); }
};

// log t_{d,nu}(z) + log T_{nu+d}(alpha^T z sqrt((nu+d)/(nu+|z|^2))), z = y - xi,
// dropping normalizing constants. `grad` may be empty.
double skew_t_log_density(std::span<const double> y, const SkewTParams& params,
                          std::span<double> grad = {});

// xi + V^{-1/2} Z with V ~ chi2_nu/nu and Z skew-normal by sign selection.
Vector skew_t_exact_sample(const SkewTParams& params, Rng& rng);

TargetPtr skew_t(SkewTParams params);

enum class Link { Logit, Robit };

// Row-major covariates with binary responses. Columns are expected to be
// standardized to mean 0 and standard deviation 0.5.
struct RegressionData {
  std::size_t n = 0;
  std::size_t d = 0;
  Vector X;             // n x d, row-major
  std::vector<int> y;   // 0/1
  Link link = Link::Logit;
  double link_nu = 2.0;  // robit degrees of freedom
  double prior_scale = 2.5;
  double prior_nu = 2.0;

  std::span<const double> row(std::size_t i) const { return {X.data() + i * d, d}; }
};

// Raw draw: x_i ~ N(0, I_d), y_i = 1{x_{i,1} > 0}. Not standardized.
RegressionData generate_separable_covariates(std::size_t n, std::size_t d, Rng& rng);
// Rescales every column to mean 0, standard deviation 0.5 (population convention).
void standardize_columns(RegressionData& data);
RegressionData generate_separable_data(std::size_t n, std::size_t d, Rng& rng);

// Sum of log-likelihood terms and independent t(prior_nu) priors on beta_j / prior_scale.
TargetPtr binary_regression_posterior(RegressionData data);

// log-likelihood part only (used to check the beta = 0 value).
double regression_log_likelihood(const RegressionData& data, std::span<const double> beta);

struct TailProbe {
  bool sub_cauchy = false;
  double sup_previous_decade = 0.0;  // max over radii in [1e4, 1e5]
  double sup_last_decade = 0.0;      // max over radii in [1e5, 1e6]
};

// Numerical witness for sup pi(y)(1+|y|^2)^{(d+1)/2} < infinity: maximizes
// log pi(y) + (d+1)/2 log(1+|y|^2) over random rays and log-spaced radii up
// to 1e6, and reports bounded when the last decade shows no increase.
TailProbe probe_sub_cauchy(const TargetModel& target, std::uint64_t seed,
                           std::size_t rays = 1000);

}  // namespace targets
}  // namespace brightside
