#pragma once

// Markov transition kernels: the sub-Cauchy projection sampler (tangent
// random-walk on the sphere with great-circle stepping-out), its stereographic
// special case, random-walk Metropolis and HMC, plus the chain driver.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "brightside/geometry.hpp"
#include "brightside/rng.hpp"
#include "brightside/targets.hpp"

namespace brightside::kernels {

using geometry::ProjectionParams;
using geometry::SpherePoint;

enum class KernelKind { SCS, SPS, RWM, HMC };

std::string_view to_string(KernelKind k) noexcept;
// Throws ConfigError for unknown names.
KernelKind parse_kernel_kind(std::string_view name);

// Degenerate great circle: 1 - <x,x'>^2 at or below this.
inline constexpr double kDegenerateTolerance = 1e-14;
inline constexpr double kMinStepSize = 1e-10;
inline constexpr double kMaxStepSize = 1e6;

struct GreatCircleFrame {
  Vector u;            // unit, orthogonal to x, in the plane of x and x'
  double alpha = 0.0;  // arc from x to x'
  double phi = 0.0;    // arc from x to the highest point of the circle
  double gamma = 0.0;  // half-width of the dark arc
  std::size_t K = 0;   // minimal k with k * alpha > phi + gamma
};

struct KernelConfig {
  KernelKind kind = KernelKind::SCS;
  double h = 0.1;                  // sphere step (SCS/SPS), RWM scale or HMC leapfrog size
  std::size_t leapfrog_steps = 10;
  double target_accept = 0.234;
  std::size_t adapt_burnin = 0;    // adapted burn-in iterations (capped at burnin)
};

double default_target_accept(KernelKind k) noexcept;

// Random walk on the sphere: Gaussian step in the tangent space at x,
// then renormalized.
SpherePoint propose_tangent(const SpherePoint& x, double h, Rng& rng);
// Same map with the ambient Gaussian draw supplied (length d+1).
SpherePoint propose_tangent_from(const SpherePoint& x, std::span<const double> delta_tilde);

// Requires x bright and x' dark at latitude threshold l_o - 1. Throws
// DegenerateProposal when x' is (numerically) +-x.
GreatCircleFrame great_circle_frame(const SpherePoint& x, const SpherePoint& x_prime,
                                    double ell_o);
SpherePoint stepping_out(const SpherePoint& x, const GreatCircleFrame& frame);
SpherePoint stepping_out(const SpherePoint& x, const SpherePoint& x_prime, double ell_o);

// Proposal x* of one SCS transition (before the accept/reject decision).
struct ScsProposal {
  SpherePoint point;
  bool stepped_out = false;
  bool degenerate = false;  // x* unusable; the transition must reject
};
ScsProposal scs_propose(const SpherePoint& x, double ell_o, double h, Rng& rng);

// log pi(SCP(x)) + log J(SCP(x)). `y_out`, when given, receives SCP(x).
double scs_log_weight(const SpherePoint& x, const ProjectionParams& p,
                      const TargetModel& target, Vector* y_out = nullptr);

struct ScsStep {
  SpherePoint x;
  bool accepted = false;
  Vector y;
};
ScsStep scs_step(const SpherePoint& x, const ProjectionParams& p, double h,
                 const TargetModel& target, Rng& rng);

// Stateful SCS chain that caches the current log weight between steps.
class ScsSampler {
 public:
  ScsSampler(ProjectionParams p, const TargetModel& target, SpherePoint x0);

  bool step(double h, Rng& rng);

  const SpherePoint& state() const noexcept { return x_; }
  const Vector& position() const noexcept { return y_; }
  double log_weight() const noexcept { return log_weight_; }
  std::size_t stepping_out_count() const noexcept { return stepped_out_; }
  const ProjectionParams& params() const noexcept { return p_; }

 private:
  ProjectionParams p_;
  const TargetModel* target_;
  SpherePoint x_;
  Vector y_;
  double log_weight_;
  std::size_t stepped_out_ = 0;
};

struct EuclideanStep {
  Vector y;
  bool accepted = false;
};

EuclideanStep rwm_step(std::span<const double> y, double h, const TargetModel& target, Rng& rng);

// L leapfrog steps of size eps with identity mass. Throws NonfiniteGradient.
void leapfrog(Vector& q, Vector& momentum, double eps, std::size_t steps,
              const TargetModel& target);

struct HmcStep {
  Vector y;
  bool accepted = false;
  double energy_error = 0.0;  // H(end) - H(start); +inf when the trajectory diverged
};
HmcStep hmc_step(std::span<const double> y, double eps, std::size_t steps,
                 const TargetModel& target, Rng& rng);

// Robbins-Monro on log h with gain t^{-0.6}; clamped to [kMinStepSize, kMaxStepSize].
double adapt_step_size(double h, bool accepted, std::size_t t, double target_accept);

struct ChainSettings {
  std::size_t iterations = 0;
  std::size_t burnin = 0;
  std::size_t thinning = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // replicate index; combined with seed
};

struct ChainOutput {
  KernelKind kind = KernelKind::SCS;
  std::size_t dim = 0;
  std::size_t n_kept = 0;
  Vector samples;  // n_kept x dim, row-major, target coordinates
  std::vector<std::size_t> kept_iterations;
  double acceptance_rate = 0.0;  // post burn-in
  double final_step_size = 0.0;
  Vector step_size_trace;  // one entry per adapted burn-in iteration
  std::size_t stepping_out_count = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double wall_time = 0.0;  // seconds
  bool valid = true;
  std::string error;

  std::span<const double> sample(std::size_t i) const { return {samples.data() + i * dim, dim}; }
  Vector coordinate(std::size_t j) const;
};

// `params` is required for SCS/SPS. SPS forces h_o = 0 and l_o = 2 while
// keeping mu and R. Configuration problems throw ConfigError before running;
// target failures end the run early with `valid = false`.
ChainOutput run_chain(const KernelConfig& config, const std::optional<ProjectionParams>& params,
                      const TargetModel& target, std::span<const double> init,
                      const ChainSettings& settings);

}  // namespace brightside::kernels
