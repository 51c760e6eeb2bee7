#include "brightside/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "brightside/error.hpp"
#include "brightside/simd.hpp"

namespace brightside::tuning {
namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double t) { return std::isfinite(t); });
}

void check_theta(const ThetaBar& theta, const TargetModel& target) {
  if (theta.h_o.size() != target.dim() || theta.mu.size() != target.dim())
    throw Error(ErrorCode::DimensionMismatch, "theta dimension differs from the target");
  if (!(theta.R > 0.0)) throw Error(ErrorCode::NonpositiveScale, "R must be positive");
}

// Geometry of one cap sample under theta.
struct CapTerms {
  double gap;     // l_o - l_x
  double ell_x;
  double facing;  // 1 - <o_c, z>
  double log_j;
};

CapTerms cap_terms(const SpherePoint& x, const ThetaBar& theta, double ell_o,
                   std::span<double> yhat) {
  const std::size_t d = theta.dim();
  const double s = ell_o - 1.0;
  CapTerms t;
  t.gap = s - x.height();
  if (!(t.gap > 0.0)) throw Error(ErrorCode::DarkSidePoint, "cap sample on the dark side");
  t.ell_x = x.height() + 1.0;
  const auto hx = x.longitude();
  t.facing = 1.0 - simd::dot(theta.h_o, hx) - s * x.height();
  const double dd = static_cast<double>(d);
  t.log_j = dd * std::log(theta.R) + dd * std::log(ell_o) + std::log(t.facing) -
            (dd + 1.0) * std::log(t.gap);
  const double a = ell_o / t.gap;
  const double b = t.ell_x / t.gap;
  for (std::size_t i = 0; i < d; ++i) yhat[i] = a * hx[i] - b * theta.h_o[i];
  return t;
}

}  // namespace

double ThetaGradient::norm() const {
  return std::sqrt(simd::sum_squares(h_o) + simd::sum_squares(mu) + R * R);
}

Vector kl_integrand(const ThetaBar& theta, double ell_o, const TargetModel& target,
                    std::span<const SpherePoint> cap_samples) {
  check_theta(theta, target);
  const std::size_t d = theta.dim();
  Vector yhat(d), y(d), out;
  out.reserve(cap_samples.size());
  for (const SpherePoint& x : cap_samples) {
    const CapTerms t = cap_terms(x, theta, ell_o, yhat);
    for (std::size_t i = 0; i < d; ++i) y[i] = theta.R * yhat[i] + theta.mu[i];
    out.push_back(-t.log_j - target.log_density(y));
  }
  return out;
}

double kl_objective(const ThetaBar& theta, double ell_o, const TargetModel& target,
                    std::span<const SpherePoint> cap_samples) {
  if (cap_samples.empty()) throw Error(ErrorCode::EmptyInput, "no cap samples");
  const Vector values = kl_integrand(theta, ell_o, target, cap_samples);
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double kl_objective_and_gradient(const ThetaBar& theta, double ell_o, const TargetModel& target,
                                 std::span<const SpherePoint> cap_samples, ThetaGradient& grad) {
  if (cap_samples.empty()) throw Error(ErrorCode::EmptyInput, "no cap samples");
  check_theta(theta, target);
  if (!target.has_gradient()) {
    grad = kl_gradient_finite_difference(theta, ell_o, target, cap_samples);
    return kl_objective(theta, ell_o, target, cap_samples);
  }
  const std::size_t d = theta.dim();
  const double dd = static_cast<double>(d);
  grad.h_o.assign(d, 0.0);
  grad.mu.assign(d, 0.0);
  grad.R = 0.0;
  Vector yhat(d), y(d), g(d);
  double sum = 0.0;
  for (const SpherePoint& x : cap_samples) {
    const CapTerms t = cap_terms(x, theta, ell_o, yhat);
    for (std::size_t i = 0; i < d; ++i) y[i] = theta.R * yhat[i] + theta.mu[i];
    const double lp = target.log_density_and_gradient(y, g);
    sum += -t.log_j - lp;
    // f = -log J - log pi(y):
    //   df/dmu  = -g
    //   df/dR   = -d/R - <g, yhat>
    //   df/dh_o = h_x / facing + (R l_x / gap) g
    const auto hx = x.longitude();
    const double c = theta.R * t.ell_x / t.gap;
    for (std::size_t i = 0; i < d; ++i) {
      grad.mu[i] -= g[i];
      grad.h_o[i] += hx[i] / t.facing + c * g[i];
    }
    grad.R += -dd / theta.R - simd::dot(g, yhat);
  }
  const double inv_n = 1.0 / static_cast<double>(cap_samples.size());
  for (std::size_t i = 0; i < d; ++i) {
    grad.mu[i] *= inv_n;
    grad.h_o[i] *= inv_n;
  }
  grad.R *= inv_n;
  return sum * inv_n;
}

ThetaGradient kl_gradient(const ThetaBar& theta, double ell_o, const TargetModel& target,
                          std::span<const SpherePoint> cap_samples) {
  ThetaGradient grad;
  kl_objective_and_gradient(theta, ell_o, target, cap_samples, grad);
  if (!all_finite(grad.h_o) || !all_finite(grad.mu) || !std::isfinite(grad.R))
    throw Error(ErrorCode::NonfiniteGradient, "KL gradient is not finite");
  return grad;
}

ThetaGradient kl_gradient_finite_difference(const ThetaBar& theta, double ell_o,
                                            const TargetModel& target,
                                            std::span<const SpherePoint> cap_samples,
                                            double rel_step) {
  const std::size_t d = theta.dim();
  ThetaGradient grad{Vector(d), Vector(d), 0.0};
  auto central = [&](auto&& set, double value) {
    const double step = rel_step * (1.0 + std::fabs(value));
    ThetaBar hi = theta;
    ThetaBar lo = theta;
    set(hi, value + step);
    set(lo, value - step);
    return (kl_objective(hi, ell_o, target, cap_samples) -
            kl_objective(lo, ell_o, target, cap_samples)) /
           (2.0 * step);
  };
  for (std::size_t i = 0; i < d; ++i) {
    grad.h_o[i] = central([i](ThetaBar& t, double v) { t.h_o[i] = v; }, theta.h_o[i]);
    grad.mu[i] = central([i](ThetaBar& t, double v) { t.mu[i] = v; }, theta.mu[i]);
  }
  grad.R = central([](ThetaBar& t, double v) { t.R = v; }, theta.R);
  return grad;
}

ThetaBar project_params(ThetaBar theta, double ell_o) {
  const double s = ell_o - 1.0;
  const double bound = 1.0 - s * s - geometry::kInteriorMargin;
  const double h2 = simd::sum_squares(theta.h_o);
  if (bound <= 0.0) {
    std::fill(theta.h_o.begin(), theta.h_o.end(), 0.0);
    return theta;
  }
  // Same expression as validate_params, so the two agree under rounding.
  const auto outside = [&] { return simd::sum_squares(theta.h_o) + s * s > 1.0 - geometry::kInteriorMargin; };
  if (h2 <= bound && !outside()) return theta;
  const double scale = std::sqrt(bound / h2);
  for (double& v : theta.h_o) v *= scale;
  while (outside())
    for (double& v : theta.h_o) v *= 1.0 - 1e-12;
  return theta;
}

Alignment alignment_metrics(const ThetaBar& theta, std::span<const double> alpha_skew,
                            std::span<const double> xi) {
  const double hn = std::sqrt(simd::sum_squares(theta.h_o));
  const double an = std::sqrt(simd::sum_squares(alpha_skew));
  const double xn = std::sqrt(simd::sum_squares(xi));
  if (!(an > 0.0) || !(xn > 0.0))
    throw Error(ErrorCode::DomainError, "alignment needs nonzero alpha and xi");
  Alignment a;
  a.cosine = hn > 0.0 ? simd::dot(theta.h_o, alpha_skew) / (hn * an) : 0.0;
  a.relative_distance = std::sqrt(simd::squared_distance(theta.mu, xi)) / xn;
  return a;
}

std::vector<SpherePoint> draw_cap_batch(std::size_t d, double ell_o, std::size_t n, Rng& rng) {
  std::vector<SpherePoint> batch;
  batch.reserve(n);
  for (std::size_t i = 0; i < n; ++i) batch.push_back(geometry::sample_uniform_cap(d, ell_o, rng));
  return batch;
}

namespace {

// A zero location leaves the relative distance undefined; it is reported as NaN.
Alignment reference_alignment(const ThetaBar& theta, const AlignmentReference& ref) {
  if (simd::sum_squares(ref.xi) > 0.0) return alignment_metrics(theta, ref.alpha_skew, ref.xi);
  const Vector unit(ref.xi.size(), 1.0);
  Alignment a = alignment_metrics(theta, ref.alpha_skew, unit);
  a.relative_distance = std::numeric_limits<double>::quiet_NaN();
  return a;
}

}  // namespace

TuneReport tune(const TargetModel& target, const TuneOptions& opts) {
  const std::size_t d = target.dim();
  if (opts.mc_batch == 0) throw Error(ErrorCode::ConfigError, "mc_batch must be at least 1");
  if (!(opts.learning_rate > 0.0)) throw Error(ErrorCode::ConfigError, "learning rate must be positive");
  if (!(opts.ell_o >= 1.0 && opts.ell_o < 2.0))
    throw Error(ErrorCode::ConfigError, "tuning needs an observer latitude in [1, 2)");

  ThetaBar theta = opts.init.value_or(ThetaBar{Vector(d, 0.0), Vector(d, 0.0), 1.0});
  if (theta.h_o.size() != d || theta.mu.size() != d || !(theta.R > 0.0))
    throw Error(ErrorCode::ConfigError, "initial theta does not match the target");
  theta = project_params(std::move(theta), opts.ell_o);

  // Packed parameters: [h_o (d), mu (d), log R].
  const std::size_t np = 2 * d + 1;
  Vector m(np, 0.0), v(np, 0.0), g(np);
  double rho = std::log(theta.R);

  TuneReport report;
  report.ell_o = opts.ell_o;
  report.objective_trace.reserve(opts.steps);
  report.grad_norm_trace.reserve(opts.steps);

  Rng rng = derive_stream(opts.seed, 0x7e57);
  std::size_t nonfinite_run = 0;
  double b1t = 1.0, b2t = 1.0;
  ThetaGradient grad;
  for (std::size_t step = 1; step <= opts.steps; ++step) {
    const auto batch = draw_cap_batch(d, opts.ell_o, opts.mc_batch, rng);
    const double value = kl_objective_and_gradient(theta, opts.ell_o, target, batch, grad);
    const bool finite = std::isfinite(value) && all_finite(grad.h_o) && all_finite(grad.mu) &&
                        std::isfinite(grad.R);
    report.objective_trace.push_back(value);
    report.grad_norm_trace.push_back(finite ? grad.norm()
                                            : std::numeric_limits<double>::quiet_NaN());
    if (!finite) {
      if (++nonfinite_run >= 10)
        throw Error(ErrorCode::NonfiniteObjective,
                    "objective non-finite for 10 consecutive steps (step " +
                        std::to_string(step) + ")");
    } else {
      nonfinite_run = 0;
      for (std::size_t i = 0; i < d; ++i) {
        g[i] = grad.h_o[i];
        g[d + i] = grad.mu[i];
      }
      g[2 * d] = grad.R * theta.R;  // chain rule to log R
      b1t *= opts.adam_beta1;
      b2t *= opts.adam_beta2;
      for (std::size_t i = 0; i < np; ++i) {
        m[i] = opts.adam_beta1 * m[i] + (1.0 - opts.adam_beta1) * g[i];
        v[i] = opts.adam_beta2 * v[i] + (1.0 - opts.adam_beta2) * g[i] * g[i];
        const double mhat = m[i] / (1.0 - b1t);
        const double vhat = v[i] / (1.0 - b2t);
        const double delta = opts.learning_rate * mhat / (std::sqrt(vhat) + opts.adam_eps);
        if (i < d) {
          theta.h_o[i] -= delta;
        } else if (i < 2 * d) {
          theta.mu[i - d] -= delta;
        } else {
          rho -= delta;
        }
      }
      theta.R = std::exp(rho);
      theta = project_params(std::move(theta), opts.ell_o);
    }
    if (opts.reference) {
      const Alignment a = reference_alignment(theta, *opts.reference);
      report.cosine_trace.push_back(a.cosine);
      if (std::isfinite(a.relative_distance)) report.distance_trace.push_back(a.relative_distance);
    }
  }
  report.theta_bar = theta;
  if (opts.reference) report.alignment = reference_alignment(theta, *opts.reference);
  return report;
}

}  // namespace brightside::tuning
