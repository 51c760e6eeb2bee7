#pragma once

// Sub-Cauchy projection between the bright side of the unit sphere S^d and R^d.
//
// Sphere points are stored origin-centered: z in R^{d+1}, |z| = 1. The
// latitude used in the projection formulas is l_x = z_{d+1} + 1 (a sphere
// resting on the plane at the south pole). A point is on the bright side when
// z_{d+1} < l_o - 1, with l_o the observer latitude.

#include <cstddef>
#include <span>
#include <vector>

#include "brightside/rng.hpp"

namespace brightside {

using Vector = std::vector<double>;

namespace geometry {

// Margin that keeps interior observers strictly inside the unit ball.
inline constexpr double kInteriorMargin = 1e-9;
// Round-off allowance on the chord-scale discriminant.
inline constexpr double kDiscriminantClamp = 1e-12;

// theta = (observer, shift, scale). Observer = (h_o, l_o) with l_o in [1, 2].
struct ProjectionParams {
  Vector h_o;
  double ell_o = 1.0;
  Vector mu;
  double R = 1.0;

  std::size_t dim() const noexcept { return h_o.size(); }

  // h_o = 0, l_o = 1, mu = 0, R = 1: pushes Unif(bright side) to the standard Cauchy.
  static ProjectionParams cauchy(std::size_t d);
  // h_o = 0, l_o = 2: classical stereographic projection.
  static ProjectionParams stereographic(std::size_t d, double R = 1.0);
};

class SpherePoint {
 public:
  SpherePoint() = default;
  // Normalizes `z` to unit length; throws NonfiniteInput on zero/non-finite input.
  explicit SpherePoint(Vector z);

  std::size_t dim() const noexcept { return z_.size() - 1; }
  std::span<const double> coords() const noexcept { return z_; }
  std::span<const double> longitude() const noexcept { return {z_.data(), dim()}; }
  double height() const noexcept { return z_.back(); }
  double operator[](std::size_t i) const noexcept { return z_[i]; }

  static SpherePoint south_pole(std::size_t d);

  friend bool operator==(const SpherePoint&, const SpherePoint&) = default;

 private:
  Vector z_;
};

// Quadratic A M^2 + 2 B M + C = 0 for the chord scale M at y.
struct ChordScale {
  double M = 1.0;
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double discriminant = 0.0;  // B^2 - A C after clamping
};

// Returns p unchanged or throws ObserverOutsideBall / NonpositiveScale /
// BoundaryWithoutSymmetry / DimensionMismatch / NonfiniteInput / DomainError.
const ProjectionParams& validate_params(const ProjectionParams& p);

bool is_bright(const SpherePoint& x, double ell_o) noexcept;

Vector scp_forward(const SpherePoint& x, const ProjectionParams& p);
ChordScale solve_chord_scale(std::span<const double> y, const ProjectionParams& p);
SpherePoint scp_inverse(std::span<const double> y, const ProjectionParams& p);

// log J_theta(y); the inner factor M|v|^2 + <v,h_o> + l_o - l_o^2(1-M) equals
// sqrt(B^2 - AC) at the positive root, which is what gets evaluated.
double log_jacobian(std::span<const double> y, const ProjectionParams& p);

// log J_theta(SCP(x)) written in x:
//   d log R + d log l_o + log(1 - <o_c, z>) - (d+1) log(l_o - 1 - z_{d+1})
// with o_c = (h_o, l_o - 1) the origin-centered observer.
double log_jacobian_at_cap_point(const SpherePoint& x, const ProjectionParams& p);

// Uniform on the bright side by rejection from the uniform sphere law.
// If `trials` is non-null it receives the number of raw draws used.
SpherePoint sample_uniform_cap(std::size_t d, double ell_o, Rng& rng,
                               std::size_t* trials = nullptr);

// Fraction of the sphere's surface lying on the dark side.
double cap_ratio_exact(std::size_t d, double ell_o);
// Upper bound (e^{1/2}/2) sqrt(d+1) [1 - (l_o-1)^2]^{(d-1)/2}.
double cap_ratio_bound(std::size_t d, double ell_o);

}  // namespace geometry
}  // namespace brightside
