#pragma once

// Variational choice of (h_o, mu, R) for a fixed observer latitude: minimize
// the Monte Carlo KL objective E_{x ~ Unif(bright side)}[-log J(x) - log pi(SCP(x))]
// with Adam, keeping h_o inside the observer ball.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "brightside/geometry.hpp"
#include "brightside/targets.hpp"

namespace brightside::tuning {

using geometry::ProjectionParams;
using geometry::SpherePoint;

struct ThetaBar {
  Vector h_o;
  Vector mu;
  double R = 1.0;

  std::size_t dim() const noexcept { return h_o.size(); }
  ProjectionParams with_latitude(double ell_o) const { return {h_o, ell_o, mu, R}; }
};

struct ThetaGradient {
  Vector h_o;
  Vector mu;
  double R = 0.0;

  double norm() const;
};

struct Alignment {
  double cosine = 0.0;             // cos(h_o, alpha_skew); 0 when h_o = 0
  double relative_distance = 0.0;  // |mu - xi| / |xi|
};

// Skewness/location of a skew-t target, for reporting how the tuned
// parameters line up with it.
struct AlignmentReference {
  Vector alpha_skew;
  Vector xi;
};

struct TuneOptions {
  double ell_o = 1.1;
  std::size_t mc_batch = 2000;
  std::size_t steps = 2000;
  double learning_rate = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::optional<ThetaBar> init;  // default h_o = 0, mu = 0, R = 1
  std::optional<AlignmentReference> reference;
};

struct TuneReport {
  ThetaBar theta_bar;
  double ell_o = 1.1;
  Vector objective_trace;
  Vector grad_norm_trace;
  std::optional<Alignment> alignment;
  Vector cosine_trace;    // filled when a reference is given
  Vector distance_trace;  // filled when a reference with nonzero xi is given
};

// Per-sample integrand -log J(x) - log pi(SCP(x)).
Vector kl_integrand(const ThetaBar& theta, double ell_o, const TargetModel& target,
                    std::span<const SpherePoint> cap_samples);

// Mean of kl_integrand: KL(q || pi) up to an additive constant.
double kl_objective(const ThetaBar& theta, double ell_o, const TargetModel& target,
                    std::span<const SpherePoint> cap_samples);

// Reparameterized gradient with the cap samples held fixed. Falls back to
// central finite differences when the target has no gradient. Throws
// NonfiniteGradient.
ThetaGradient kl_gradient(const ThetaBar& theta, double ell_o, const TargetModel& target,
                          std::span<const SpherePoint> cap_samples);

// Objective and gradient in one pass over the batch.
double kl_objective_and_gradient(const ThetaBar& theta, double ell_o, const TargetModel& target,
                                 std::span<const SpherePoint> cap_samples, ThetaGradient& grad);

// Central finite differences of kl_objective over all 2d+1 coordinates,
// step 1e-5 (1 + |coordinate|).
ThetaGradient kl_gradient_finite_difference(const ThetaBar& theta, double ell_o,
                                            const TargetModel& target,
                                            std::span<const SpherePoint> cap_samples,
                                            double rel_step = 1e-5);

// Radially rescales h_o onto |h_o|^2 <= 1 - (l_o-1)^2 - margin when outside.
ThetaBar project_params(ThetaBar theta, double ell_o);

Alignment alignment_metrics(const ThetaBar& theta, std::span<const double> alpha_skew,
                            std::span<const double> xi);

std::vector<SpherePoint> draw_cap_batch(std::size_t d, double ell_o, std::size_t n, Rng& rng);

// Adam on (h_o, mu, log R) with a fresh batch per step. Throws
// NonfiniteObjective after 10 consecutive non-finite objective values.
TuneReport tune(const TargetModel& target, const TuneOptions& opts);

}  // namespace brightside::tuning
