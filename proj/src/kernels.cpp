#include "brightside/kernels.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>

#include "brightside/error.hpp"
#include "brightside/simd.hpp"

namespace brightside::kernels {

std::string_view to_string(KernelKind k) noexcept {
  switch (k) {
    case KernelKind::SCS: return "scs";
    case KernelKind::SPS: return "sps";
    case KernelKind::RWM: return "rwm";
    case KernelKind::HMC: return "hmc";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "scs") return KernelKind::SCS;
  if (lower == "sps") return KernelKind::SPS;
  if (lower == "rwm") return KernelKind::RWM;
  if (lower == "hmc") return KernelKind::HMC;
  throw Error(ErrorCode::ConfigError, "unknown kernel '" + std::string(name) + "'");
}

double default_target_accept(KernelKind k) noexcept { return k == KernelKind::HMC ? 0.8 : 0.234; }

Vector ChainOutput::coordinate(std::size_t j) const {
  Vector out(n_kept);
  for (std::size_t i = 0; i < n_kept; ++i) out[i] = samples[i * dim + j];
  return out;
}

SpherePoint propose_tangent_from(const SpherePoint& x, std::span<const double> delta_tilde) {
  const auto z = x.coords();
  if (delta_tilde.size() != z.size())
    throw Error(ErrorCode::DimensionMismatch, "tangent draw must have d+1 entries");
  const double proj = simd::dot(z, delta_tilde);
  Vector next(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) next[i] = z[i] + (delta_tilde[i] - proj * z[i]);
  return SpherePoint(std::move(next));
}

SpherePoint propose_tangent(const SpherePoint& x, double h, Rng& rng) {
  Vector delta(x.dim() + 1);
  fill_standard_normal(rng, delta);
  for (double& v : delta) v *= h;
  return propose_tangent_from(x, delta);
}

GreatCircleFrame great_circle_frame(const SpherePoint& x, const SpherePoint& x_prime,
                                    double ell_o) {
  if (x.dim() != x_prime.dim()) throw Error(ErrorCode::DimensionMismatch, "sphere dimensions");
  const double threshold = ell_o - 1.0;
  if (!(x.height() < threshold) || !(x_prime.height() > threshold))
    throw Error(ErrorCode::DomainError, "stepping-out needs x bright and x' dark");
  const auto a = x.coords();
  const auto b = x_prime.coords();
  const double c = simd::dot(a, b);
  const double s2 = 1.0 - c * c;
  if (!(s2 > kDegenerateTolerance))
    throw Error(ErrorCode::DegenerateProposal, "proposal is (anti)parallel to the state");
  const double s = std::sqrt(s2);
  GreatCircleFrame f;
  f.u.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) f.u[i] = (b[i] - c * a[i]) / s;
  f.alpha = std::atan2(s, c);
  const double xl = x.height();
  const double ul = f.u.back();
  // Latitude along the circle is amp * cos(theta - phi).
  const double amp = std::hypot(xl, ul);
  f.phi = std::atan2(ul, xl);
  if (f.phi < 0.0) f.phi += 2.0 * std::numbers::pi;
  f.gamma = std::acos(std::clamp(threshold / amp, -1.0, 1.0));
  const double reach = f.phi + f.gamma;
  auto k = static_cast<std::size_t>(std::floor(reach / f.alpha)) + 1;
  while (static_cast<double>(k) * f.alpha <= reach) ++k;
  while (k > 1 && static_cast<double>(k - 1) * f.alpha > reach) --k;
  f.K = k;
  return f;
}

SpherePoint stepping_out(const SpherePoint& x, const GreatCircleFrame& frame) {
  const double limit = std::ceil(2.0 * std::numbers::pi / frame.alpha) + 1.0;
  if (static_cast<double>(frame.K) > limit)
    throw Error(ErrorCode::DomainError, "stepping-out exceeded one revolution");
  const double angle = static_cast<double>(frame.K) * frame.alpha;
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  const auto z = x.coords();
  Vector out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = ca * z[i] + sa * frame.u[i];
  return SpherePoint(std::move(out));
}

SpherePoint stepping_out(const SpherePoint& x, const SpherePoint& x_prime, double ell_o) {
  return stepping_out(x, great_circle_frame(x, x_prime, ell_o));
}

ScsProposal scs_propose(const SpherePoint& x, double ell_o, double h, Rng& rng) {
  ScsProposal prop{propose_tangent(x, h, rng), false, false};
  const double threshold = ell_o - 1.0;
  if (!(prop.point.height() > threshold)) return prop;
  if (ell_o >= 2.0) {
    // The dark side is the single north pole.
    prop.degenerate = true;
    return prop;
  }
  try {
    prop.point = stepping_out(x, prop.point, ell_o);
    prop.stepped_out = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateProposal) throw;
    prop.degenerate = true;
    return prop;
  }
  if (!(prop.point.height() < threshold)) prop.degenerate = true;
  return prop;
}

double scs_log_weight(const SpherePoint& x, const ProjectionParams& p, const TargetModel& target,
                      Vector* y_out) {
  Vector y = geometry::scp_forward(x, p);
  const double w = target.log_density(y) + geometry::log_jacobian_at_cap_point(x, p);
  if (y_out) *y_out = std::move(y);
  return w;
}

namespace {

bool metropolis_accept(double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio)) return false;
  if (log_ratio >= 0.0) {
    uniform01(rng);  // keep stream consumption independent of the outcome
    return true;
  }
  return std::log(uniform01(rng)) < log_ratio;
}

}  // namespace

ScsSampler::ScsSampler(ProjectionParams p, const TargetModel& target, SpherePoint x0)
    : p_(std::move(p)), target_(&target), x_(std::move(x0)) {
  geometry::validate_params(p_);
  if (target.dim() != p_.dim()) throw Error(ErrorCode::DimensionMismatch, "target dimension");
  log_weight_ = scs_log_weight(x_, p_, *target_, &y_);
}

bool ScsSampler::step(double h, Rng& rng) {
  ScsProposal prop = scs_propose(x_, p_.ell_o, h, rng);
  if (prop.stepped_out) ++stepped_out_;
  if (prop.degenerate) {
    uniform01(rng);
    return false;
  }
  Vector y_new;
  double w_new;
  try {
    w_new = scs_log_weight(prop.point, p_, *target_, &y_new);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DarkSidePoint) throw;
    uniform01(rng);
    return false;
  }
  if (!metropolis_accept(w_new - log_weight_, rng)) return false;
  x_ = std::move(prop.point);
  y_ = std::move(y_new);
  log_weight_ = w_new;
  return true;
}

ScsStep scs_step(const SpherePoint& x, const ProjectionParams& p, double h,
                 const TargetModel& target, Rng& rng) {
  ScsSampler sampler(p, target, x);
  const bool accepted = sampler.step(h, rng);
  return ScsStep{sampler.state(), accepted, sampler.position()};
}

namespace {

struct EuclideanState {
  Vector y;
  double log_density = 0.0;
  Vector grad;  // HMC only
};

bool rwm_transition(EuclideanState& s, double h, const TargetModel& target, Rng& rng) {
  Vector proposal(s.y.size());
  fill_standard_normal(rng, proposal);
  for (std::size_t i = 0; i < proposal.size(); ++i) proposal[i] = s.y[i] + h * proposal[i];
  const double lp = target.log_density(proposal);
  if (!metropolis_accept(lp - s.log_density, rng)) return false;
  s.y = std::move(proposal);
  s.log_density = lp;
  return true;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double t) { return std::isfinite(t); });
}

// Leapfrog starting from a known gradient; returns log density at the end and
// leaves the end gradient in `grad`.
double leapfrog_from(Vector& q, Vector& momentum, Vector& grad, double eps, std::size_t steps,
                     const TargetModel& target) {
  double lp = 0.0;
  simd::axpy(0.5 * eps, grad, momentum);
  for (std::size_t l = 0; l < steps; ++l) {
    simd::axpy(eps, momentum, q);
    lp = target.log_density_and_gradient(q, grad);
    if (!all_finite(grad) || std::isnan(lp))
      throw Error(ErrorCode::NonfiniteGradient, "leapfrog produced a non-finite gradient");
    simd::axpy(l + 1 < steps ? eps : 0.5 * eps, grad, momentum);
  }
  return lp;
}

struct HmcOutcome {
  bool accepted;
  double energy_error;
};

HmcOutcome hmc_transition(EuclideanState& s, double eps, std::size_t steps,
                          const TargetModel& target, Rng& rng) {
  const std::size_t d = s.y.size();
  Vector momentum(d);
  fill_standard_normal(rng, momentum);
  const double h0 = -s.log_density + 0.5 * simd::sum_squares(momentum);
  Vector q = s.y;
  Vector grad = s.grad;
  double lp;
  try {
    lp = leapfrog_from(q, momentum, grad, eps, steps, target);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonfiniteGradient) throw;
    uniform01(rng);
    return {false, std::numeric_limits<double>::infinity()};
  }
  const double h1 = -lp + 0.5 * simd::sum_squares(momentum);
  const double de = h1 - h0;
  if (!metropolis_accept(-de, rng)) return {false, de};
  s.y = std::move(q);
  s.log_density = lp;
  s.grad = std::move(grad);
  return {true, de};
}

}  // namespace

EuclideanStep rwm_step(std::span<const double> y, double h, const TargetModel& target, Rng& rng) {
  EuclideanState s{Vector(y.begin(), y.end()), target.log_density(y), {}};
  const bool accepted = rwm_transition(s, h, target, rng);
  return {std::move(s.y), accepted};
}

void leapfrog(Vector& q, Vector& momentum, double eps, std::size_t steps,
              const TargetModel& target) {
  Vector grad(q.size());
  target.log_density_and_gradient(q, grad);
  if (!all_finite(grad))
    throw Error(ErrorCode::NonfiniteGradient, "non-finite gradient at trajectory start");
  leapfrog_from(q, momentum, grad, eps, steps, target);
}

HmcStep hmc_step(std::span<const double> y, double eps, std::size_t steps,
                 const TargetModel& target, Rng& rng) {
  if (!target.has_gradient()) throw Error(ErrorCode::ConfigError, "HMC needs a gradient");
  EuclideanState s{Vector(y.begin(), y.end()), 0.0, Vector(y.size())};
  s.log_density = target.log_density_and_gradient(s.y, s.grad);
  const HmcOutcome out = hmc_transition(s, eps, steps, target, rng);
  return {std::move(s.y), out.accepted, out.energy_error};
}

double adapt_step_size(double h, bool accepted, std::size_t t, double target_accept) {
  const double gain = std::pow(static_cast<double>(std::max<std::size_t>(t, 1)), -0.6);
  const double next = std::exp(std::log(h) + gain * ((accepted ? 1.0 : 0.0) - target_accept));
  return std::clamp(next, kMinStepSize, kMaxStepSize);
}

namespace {

void preflight(const KernelConfig& config, const std::optional<ProjectionParams>& params,
               const TargetModel& target, std::span<const double> init,
               const ChainSettings& settings) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); };
  if (settings.iterations <= settings.burnin) fail("iterations must exceed burn-in");
  if (settings.thinning == 0) fail("thinning must be at least 1");
  if (!(config.h > 0.0) || !std::isfinite(config.h)) fail("step size must be positive");
  if (!(config.target_accept > 0.0 && config.target_accept < 1.0))
    fail("target acceptance must lie in (0,1)");
  if (init.size() != target.dim()) fail("initial point has the wrong dimension");
  if (!all_finite(init)) fail("initial point must be finite");
  if (config.kind == KernelKind::HMC) {
    if (config.leapfrog_steps == 0) fail("HMC needs at least one leapfrog step");
    if (!target.has_gradient()) fail("HMC needs a target with a gradient");
  }
  if (config.kind == KernelKind::SCS || config.kind == KernelKind::SPS) {
    if (!params) fail("SCS/SPS need projection parameters");
    try {
      geometry::validate_params(*params);
    } catch (const Error& e) {
      fail(e.what());
    }
    if (params->dim() != target.dim()) fail("projection dimension differs from the target");
  }
}

}  // namespace

ChainOutput run_chain(const KernelConfig& config, const std::optional<ProjectionParams>& params,
                      const TargetModel& target, std::span<const double> init,
                      const ChainSettings& settings) {
  preflight(config, params, target, init, settings);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t d = target.dim();

  ChainOutput out;
  out.kind = config.kind;
  out.dim = d;
  out.seed = settings.seed;
  out.stream = settings.stream;
  const std::size_t n_keep = (settings.iterations - settings.burnin) / settings.thinning;
  out.samples.reserve(n_keep * d);
  out.kept_iterations.reserve(n_keep);

  Rng rng = derive_stream(settings.seed, settings.stream);
  double h = config.h;
  const std::size_t adapt_until = std::min(config.adapt_burnin, settings.burnin);
  if (adapt_until > 0) out.step_size_trace.reserve(adapt_until);
  std::size_t accepted_after_burnin = 0;

  std::optional<ScsSampler> scs;
  EuclideanState euclid;
  try {
    if (config.kind == KernelKind::SCS || config.kind == KernelKind::SPS) {
      ProjectionParams p = *params;
      if (config.kind == KernelKind::SPS) {
        std::fill(p.h_o.begin(), p.h_o.end(), 0.0);
        p.ell_o = 2.0;
      }
      SpherePoint x0 = geometry::scp_inverse(init, p);
      scs.emplace(std::move(p), target, std::move(x0));
    } else {
      euclid.y.assign(init.begin(), init.end());
      if (config.kind == KernelKind::HMC) {
        euclid.grad.resize(d);
        euclid.log_density = target.log_density_and_gradient(euclid.y, euclid.grad);
      } else {
        euclid.log_density = target.log_density(euclid.y);
      }
    }

    for (std::size_t t = 1; t <= settings.iterations; ++t) {
      bool accepted = false;
      switch (config.kind) {
        case KernelKind::SCS:
        case KernelKind::SPS: accepted = scs->step(h, rng); break;
        case KernelKind::RWM: accepted = rwm_transition(euclid, h, target, rng); break;
        case KernelKind::HMC:
          accepted = hmc_transition(euclid, h, config.leapfrog_steps, target, rng).accepted;
          break;
      }
      if (t <= settings.burnin) {
        if (t <= adapt_until) {
          h = adapt_step_size(h, accepted, t, config.target_accept);
          out.step_size_trace.push_back(h);
        }
        continue;
      }
      if (accepted) ++accepted_after_burnin;
      if ((t - settings.burnin) % settings.thinning == 0) {
        const Vector& y = scs ? scs->position() : euclid.y;
        out.samples.insert(out.samples.end(), y.begin(), y.end());
        out.kept_iterations.push_back(t);
      }
    }
  } catch (const std::exception& e) {
    out.valid = false;
    out.error = e.what();
  }

  out.n_kept = out.kept_iterations.size();
  const std::size_t post = settings.iterations - settings.burnin;
  out.acceptance_rate = static_cast<double>(accepted_after_burnin) / static_cast<double>(post);
  out.final_step_size = h;
  if (scs) out.stepping_out_count = scs->stepping_out_count();
  out.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace brightside::kernels
