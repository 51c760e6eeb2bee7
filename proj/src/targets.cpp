#include "brightside/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "brightside/error.hpp"
#include "brightside/simd.hpp"
#include "brightside/special.hpp"

namespace brightside {

double TargetModel::log_density_and_gradient(std::span<const double>, std::span<double>) const {
  throw Error(ErrorCode::TargetFailure, name() + " does not provide a gradient");
}

Vector TargetModel::exact_sample(Rng&) const {
  throw Error(ErrorCode::TargetFailure, name() + " has no exact sampler");
}

Vector TargetModel::grad_log_density(std::span<const double> y) const {
  Vector g(dim());
  log_density_and_gradient(y, g);
  return g;
}

namespace targets {
namespace {

void check_dim(std::span<const double> y, std::size_t d) {
  if (y.size() != d) throw Error(ErrorCode::DimensionMismatch, "target dimension mismatch");
}

class StudentT final : public TargetModel {
 public:
  StudentT(std::size_t d, double nu, Vector loc, double scale)
      : d_(d), nu_(nu), loc_(std::move(loc)), scale_(scale) {}

  std::size_t dim() const noexcept override { return d_; }
  std::string name() const override {
    return nu_ == 1.0 ? "cauchy" : "student_t(nu=" + std::to_string(nu_) + ")";
  }
  bool has_gradient() const noexcept override { return true; }
  bool has_exact_sampler() const noexcept override { return true; }

  double log_density(std::span<const double> y) const override {
    check_dim(y, d_);
    const double q = simd::squared_distance(y, loc_) / (scale_ * scale_);
    return -0.5 * (nu_ + static_cast<double>(d_)) * std::log1p(q / nu_);
  }

  double log_density_and_gradient(std::span<const double> y,
                                  std::span<double> grad) const override {
    check_dim(y, d_);
    const double s2 = scale_ * scale_;
    const double q = simd::squared_distance(y, loc_) / s2;
    const double dd = static_cast<double>(d_);
    const double coef = -(nu_ + dd) / (nu_ + q) / s2;
    for (std::size_t i = 0; i < d_; ++i) grad[i] = coef * (y[i] - loc_[i]);
    return -0.5 * (nu_ + dd) * std::log1p(q / nu_);
  }

  Vector exact_sample(Rng& rng) const override {
    Vector y(d_);
    fill_standard_normal(rng, y);
    const double v = std::chi_squared_distribution<double>(nu_)(rng) / nu_;
    const double f = scale_ / std::sqrt(v);
    for (std::size_t i = 0; i < d_; ++i) y[i] = loc_[i] + f * y[i];
    return y;
  }

 private:
  std::size_t d_;
  double nu_;
  Vector loc_;
  double scale_;
};

class SkewT final : public TargetModel {
 public:
  explicit SkewT(SkewTParams p) : p_(std::move(p)) {}

  std::size_t dim() const noexcept override { return p_.dim(); }
  std::string name() const override { return "skew_t(nu=" + std::to_string(p_.nu) + ")"; }
  bool has_gradient() const noexcept override { return true; }
  bool has_exact_sampler() const noexcept override { return true; }

  double log_density(std::span<const double> y) const override {
    return skew_t_log_density(y, p_);
  }
  double log_density_and_gradient(std::span<const double> y,
                                  std::span<double> grad) const override {
    return skew_t_log_density(y, p_, grad);
  }
  Vector exact_sample(Rng& rng) const override { return skew_t_exact_sample(p_, rng); }

 private:
  SkewTParams p_;
};

// log F(t) and d/dt log F(t) for the chosen link.
struct LinkTerm {
  double log_f;
  double dlog_f;
};

LinkTerm link_term(Link link, double nu, double t) {
  if (link == Link::Logit) {
    // d/dt log sigma(t) = sigma(-t)
    const double s = t >= 0.0 ? std::exp(-t) / (1.0 + std::exp(-t)) : 1.0 / (1.0 + std::exp(t));
    return {log_sigmoid(t), s};
  }
  const double log_cdf = student_t_log_cdf(t, nu);
  return {log_cdf, std::exp(student_t_log_pdf(t, nu) - log_cdf)};
}

class BinaryRegression final : public TargetModel {
 public:
  explicit BinaryRegression(RegressionData data) : data_(std::move(data)) {}

  std::size_t dim() const noexcept override { return data_.d; }
  std::string name() const override {
    return data_.link == Link::Logit ? "logistic_regression" : "robit_regression";
  }
  bool has_gradient() const noexcept override { return true; }

  double log_density(std::span<const double> beta) const override {
    check_dim(beta, data_.d);
    return regression_log_likelihood(data_, beta) + log_prior(beta, {});
  }

  double log_density_and_gradient(std::span<const double> beta,
                                  std::span<double> grad) const override {
    check_dim(beta, data_.d);
    const std::size_t n = data_.n;
    Vector eta(n);
    simd::gemv(data_.X, n, data_.d, beta, eta);
    Vector w(n);
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sign = data_.y[i] ? 1.0 : -1.0;
      const LinkTerm term = link_term(data_.link, data_.link_nu, sign * eta[i]);
      ll += term.log_f;
      w[i] = sign * term.dlog_f;
    }
    simd::gemv_t(data_.X, n, data_.d, w, grad);
    return ll + log_prior(beta, grad);
  }

 private:
  // Adds the prior gradient into `grad` when non-empty.
  double log_prior(std::span<const double> beta, std::span<double> grad) const {
    const double nu = data_.prior_nu;
    const double s = data_.prior_scale;
    double lp = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) {
      const double u = beta[j] / s;
      lp += -0.5 * (nu + 1.0) * std::log1p(u * u / nu);
      if (!grad.empty()) grad[j] += -(nu + 1.0) * u / (s * (nu + u * u));
    }
    return lp;
  }

  RegressionData data_;
};

}  // namespace

TargetPtr mv_student_t(std::size_t d, double nu, Vector loc, double scale) {
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "dimension must be positive");
  if (!(nu > 0.0)) throw Error(ErrorCode::DomainError, "nu must be positive");
  if (!(scale > 0.0)) throw Error(ErrorCode::NonpositiveScale, "scale must be positive");
  if (loc.empty()) loc.assign(d, 0.0);
  if (loc.size() != d) throw Error(ErrorCode::DimensionMismatch, "loc dimension");
  return std::make_shared<StudentT>(d, nu, std::move(loc), scale);
}

TargetPtr standard_cauchy(std::size_t d) { return mv_student_t(d, 1.0, Vector(d, 0.0), 1.0); }

double skew_t_log_density(std::span<const double> y, const SkewTParams& params,
                          std::span<double> grad) {
  const std::size_t d = params.dim();
  check_dim(y, d);
  const double nu = params.nu;
  const double dd = static_cast<double>(d);
  const double q = simd::squared_distance(y, params.xi);
  double az = 0.0;
  for (std::size_t i = 0; i < d; ++i) az += params.alpha_skew[i] * (y[i] - params.xi[i]);
  const double scale = std::sqrt((nu + dd) / (nu + q));
  const double w = az * scale;
  const double log_cdf = student_t_log_cdf(w, nu + dd);
  const double value = -0.5 * (nu + dd) * std::log1p(q / nu) + log_cdf;
  if (!grad.empty()) {
    // d/dz: -(nu+d) z/(nu+Q) + [pdf/cdf](w) * scale * (alpha - (alpha^T z) z/(nu+Q))
    const double ratio = std::exp(student_t_log_pdf(w, nu + dd) - log_cdf);
    const double inv = 1.0 / (nu + q);
    for (std::size_t i = 0; i < d; ++i) {
      const double z = y[i] - params.xi[i];
      grad[i] = -(nu + dd) * z * inv + ratio * scale * (params.alpha_skew[i] - az * z * inv);
    }
  }
  return value;
}

Vector skew_t_exact_sample(const SkewTParams& params, Rng& rng) {
  const std::size_t d = params.dim();
  Vector u(d);
  fill_standard_normal(rng, u);
  const double w = std::normal_distribution<double>(0.0, 1.0)(rng);
  const double v = std::chi_squared_distribution<double>(params.nu)(rng) / params.nu;
  const double sign = w <= simd::dot(params.alpha_skew, u) ? 1.0 : -1.0;
  const double f = sign / std::sqrt(v);
  Vector y(d);
  for (std::size_t i = 0; i < d; ++i) y[i] = params.xi[i] + f * u[i];
  return y;
}

TargetPtr skew_t(SkewTParams params) {
  if (params.dim() == 0) throw Error(ErrorCode::DimensionMismatch, "dimension must be positive");
  if (params.alpha_skew.size() != params.dim())
    throw Error(ErrorCode::DimensionMismatch, "alpha_skew dimension");
  if (!(params.nu > 0.0)) throw Error(ErrorCode::DomainError, "nu must be positive");
  return std::make_shared<SkewT>(std::move(params));
}

RegressionData generate_separable_covariates(std::size_t n, std::size_t d, Rng& rng) {
  if (n < 2 || d < 1) throw Error(ErrorCode::DomainError, "need n >= 2 and d >= 1");
  RegressionData data;
  data.n = n;
  data.d = d;
  data.X.resize(n * d);
  data.y.resize(n);
  fill_standard_normal(rng, data.X);
  for (std::size_t i = 0; i < n; ++i) data.y[i] = data.X[i * d] > 0.0 ? 1 : 0;
  return data;
}

void standardize_columns(RegressionData& data) {
  const std::size_t n = data.n;
  for (std::size_t j = 0; j < data.d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += data.X[i * data.d + j];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double& v = data.X[i * data.d + j];
      v -= mean;
      ss += v * v;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (!(sd > 0.0)) throw Error(ErrorCode::DomainError, "constant covariate column");
    const double f = 0.5 / sd;
    for (std::size_t i = 0; i < n; ++i) data.X[i * data.d + j] *= f;
  }
}

RegressionData generate_separable_data(std::size_t n, std::size_t d, Rng& rng) {
  RegressionData data = generate_separable_covariates(n, d, rng);
  standardize_columns(data);
  return data;
}

TargetPtr binary_regression_posterior(RegressionData data) {
  if (data.n == 0 || data.d == 0) throw Error(ErrorCode::EmptyInput, "empty regression data");
  if (data.X.size() != data.n * data.d || data.y.size() != data.n)
    throw Error(ErrorCode::DimensionMismatch, "regression data shape");
  for (int v : data.y)
    if (v != 0 && v != 1) throw Error(ErrorCode::DomainError, "responses must be 0/1");
  if (!(data.prior_scale > 0.0) || !(data.prior_nu > 0.0) || !(data.link_nu > 0.0))
    throw Error(ErrorCode::DomainError, "prior scale and degrees of freedom must be positive");
  return std::make_shared<BinaryRegression>(std::move(data));
}

double regression_log_likelihood(const RegressionData& data, std::span<const double> beta) {
  Vector eta(data.n);
  simd::gemv(data.X, data.n, data.d, beta, eta);
  double ll = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    // Both links are symmetric, so 1 - F(t) = F(-t).
    const double t = data.y[i] ? eta[i] : -eta[i];
    ll += data.link == Link::Logit ? log_sigmoid(t) : student_t_log_cdf(t, data.link_nu);
  }
  return ll;
}

TailProbe probe_sub_cauchy(const TargetModel& target, std::uint64_t seed, std::size_t rays) {
  const std::size_t d = target.dim();
  Rng rng = derive_stream(seed, 0x7a11);
  const double half_d1 = 0.5 * static_cast<double>(d + 1);
  constexpr int kPerDecade = 10;
  constexpr int kDecades = 6;
  std::vector<double> sup(kPerDecade * kDecades + 1, -std::numeric_limits<double>::infinity());
  Vector dir(d), y(d);
  for (std::size_t r = 0; r < rays; ++r) {
    fill_standard_normal(rng, dir);
    const double norm = std::sqrt(simd::sum_squares(dir));
    for (double& v : dir) v /= norm;
    for (int k = 0; k <= kPerDecade * kDecades; ++k) {
      const double radius = std::pow(10.0, static_cast<double>(k) / kPerDecade);
      for (std::size_t i = 0; i < d; ++i) y[i] = radius * dir[i];
      const double v = target.log_density(y) + half_d1 * std::log1p(radius * radius);
      sup[k] = std::max(sup[k], v);
    }
  }
  TailProbe probe;
  const int last = kPerDecade * kDecades;
  probe.sup_last_decade = *std::max_element(sup.begin() + last - kPerDecade, sup.end());
  probe.sup_previous_decade =
      *std::max_element(sup.begin() + last - 2 * kPerDecade, sup.begin() + last - kPerDecade + 1);
  const double tol = 1e-6 * (1.0 + std::fabs(probe.sup_previous_decade));
  probe.sub_cauchy = !std::isnan(probe.sup_last_decade) &&
                     probe.sup_last_decade != std::numeric_limits<double>::infinity() &&
                     !(probe.sup_last_decade > probe.sup_previous_decade + tol);
  return probe;
}

}  // namespace targets
}  // namespace brightside
