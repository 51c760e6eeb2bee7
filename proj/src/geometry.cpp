#include "brightside/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "brightside/error.hpp"
#include "brightside/simd.hpp"
#include "brightside/special.hpp"

namespace brightside::geometry {
namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double t) { return std::isfinite(t); });
}

}  // namespace

ProjectionParams ProjectionParams::cauchy(std::size_t d) {
  return ProjectionParams{Vector(d, 0.0), 1.0, Vector(d, 0.0), 1.0};
}

ProjectionParams ProjectionParams::stereographic(std::size_t d, double R) {
  return ProjectionParams{Vector(d, 0.0), 2.0, Vector(d, 0.0), R};
}

SpherePoint::SpherePoint(Vector z) : z_(std::move(z)) {
  if (z_.size() < 2) throw Error(ErrorCode::DimensionMismatch, "sphere point needs d >= 1");
  const double norm = std::sqrt(simd::sum_squares(z_));
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw Error(ErrorCode::NonfiniteInput, "sphere point must be finite and nonzero");
  for (double& v : z_) v /= norm;
}

SpherePoint SpherePoint::south_pole(std::size_t d) {
  Vector z(d + 1, 0.0);
  z[d] = -1.0;
  return SpherePoint(std::move(z));
}

const ProjectionParams& validate_params(const ProjectionParams& p) {
  const std::size_t d = p.h_o.size();
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "dimension must be positive");
  if (p.mu.size() != d)
    throw Error(ErrorCode::DimensionMismatch, "mu has " + std::to_string(p.mu.size()) +
                                                  " entries, h_o has " + std::to_string(d));
  if (!all_finite(p.h_o) || !all_finite(p.mu) || !std::isfinite(p.ell_o) || !std::isfinite(p.R))
    throw Error(ErrorCode::NonfiniteInput, "projection parameters must be finite");
  if (!(p.R > 0.0)) throw Error(ErrorCode::NonpositiveScale, "R must be positive");
  if (p.ell_o < 1.0 || p.ell_o > 2.0)
    throw Error(ErrorCode::DomainError, "observer latitude must lie in [1, 2]");
  const double h2 = simd::sum_squares(p.h_o);
  if (p.ell_o == 2.0) {
    if (h2 != 0.0)
      throw Error(ErrorCode::BoundaryWithoutSymmetry,
                  "observer latitude 2 requires h_o = 0 exactly");
    return p;
  }
  const double s = p.ell_o - 1.0;
  if (h2 + s * s > 1.0 - kInteriorMargin)
    throw Error(ErrorCode::ObserverOutsideBall,
                "|h_o|^2 + (l_o-1)^2 = " + std::to_string(h2 + s * s) + " exceeds the unit ball");
  return p;
}

bool is_bright(const SpherePoint& x, double ell_o) noexcept { return x.height() < ell_o - 1.0; }

Vector scp_forward(const SpherePoint& x, const ProjectionParams& p) {
  const std::size_t d = p.dim();
  if (x.dim() != d) throw Error(ErrorCode::DimensionMismatch, "sphere point dimension");
  const double gap = (p.ell_o - 1.0) - x.height();  // l_o - l_x
  if (!(gap > 0.0))
    throw Error(ErrorCode::DarkSidePoint, "point is not on the bright side");
  const double ell_x = x.height() + 1.0;
  const double a = p.R * p.ell_o / gap;
  const double b = p.R * ell_x / gap;
  Vector y(d);
  const auto hx = x.longitude();
  for (std::size_t i = 0; i < d; ++i) y[i] = a * hx[i] - b * p.h_o[i] + p.mu[i];
  if (!all_finite(y)) throw Error(ErrorCode::DarkSidePoint, "projection overflowed");
  return y;
}

namespace {

// v = (y - mu)/R - h_o written into `v`; returns yhat in `yhat`.
void centered(std::span<const double> y, const ProjectionParams& p, Vector& yhat, Vector& v) {
  const std::size_t d = p.dim();
  yhat.resize(d);
  v.resize(d);
  const double inv_r = 1.0 / p.R;
  for (std::size_t i = 0; i < d; ++i) {
    yhat[i] = (y[i] - p.mu[i]) * inv_r;
    v[i] = yhat[i] - p.h_o[i];
  }
}

ChordScale chord_from_centered(std::span<const double> v, const ProjectionParams& p) {
  const double l = p.ell_o;
  const double s = l - 1.0;
  ChordScale c;
  c.A = simd::sum_squares(v) + l * l;
  c.B = simd::dot(v, p.h_o) - l * s;
  c.C = simd::sum_squares(p.h_o) + s * s - 1.0;
  double disc = c.B * c.B - c.A * c.C;
  if (disc < 0.0) {
    if (disc < -kDiscriminantClamp)
      throw Error(ErrorCode::NegativeDiscriminant,
                  "chord-scale discriminant " + std::to_string(disc));
    disc = 0.0;
  }
  c.discriminant = disc;
  const double root = std::sqrt(disc);
  // Conjugate form avoids cancellation between -B and the root when B > 0.
  c.M = c.B > 0.0 ? -c.C / (c.B + root) : (root - c.B) / c.A;
  return c;
}

}  // namespace

ChordScale solve_chord_scale(std::span<const double> y, const ProjectionParams& p) {
  if (y.size() != p.dim()) throw Error(ErrorCode::DimensionMismatch, "y dimension");
  if (!all_finite(y)) throw Error(ErrorCode::NonfiniteInput, "y must be finite");
  Vector yhat, v;
  centered(y, p, yhat, v);
  return chord_from_centered(v, p);
}

SpherePoint scp_inverse(std::span<const double> y, const ProjectionParams& p) {
  if (y.size() != p.dim()) throw Error(ErrorCode::DimensionMismatch, "y dimension");
  if (!all_finite(y)) throw Error(ErrorCode::NonfiniteInput, "y must be finite");
  const std::size_t d = p.dim();
  Vector yhat, v;
  centered(y, p, yhat, v);
  const ChordScale c = chord_from_centered(v, p);
  Vector z(d + 1);
  for (std::size_t i = 0; i < d; ++i) z[i] = c.M * yhat[i] + (1.0 - c.M) * p.h_o[i];
  // l_x - 1 = (1-M) l_o - 1, arranged so the distance to the boundary is exact.
  z[d] = (p.ell_o - 1.0) - c.M * p.ell_o;
  return SpherePoint(std::move(z));
}

double log_jacobian(std::span<const double> y, const ProjectionParams& p) {
  if (y.size() != p.dim()) throw Error(ErrorCode::DimensionMismatch, "y dimension");
  if (!all_finite(y)) throw Error(ErrorCode::NonfiniteInput, "y must be finite");
  Vector yhat, v;
  centered(y, p, yhat, v);
  const ChordScale c = chord_from_centered(v, p);
  const double d = static_cast<double>(p.dim());
  return d * std::log(p.R) + 0.5 * std::log(c.discriminant) - d * std::log(c.M) -
         std::log(p.ell_o);
}

double log_jacobian_at_cap_point(const SpherePoint& x, const ProjectionParams& p) {
  if (x.dim() != p.dim()) throw Error(ErrorCode::DimensionMismatch, "sphere point dimension");
  const double s = p.ell_o - 1.0;
  const double gap = s - x.height();
  if (!(gap > 0.0)) throw Error(ErrorCode::DarkSidePoint, "point is not on the bright side");
  const double d = static_cast<double>(p.dim());
  const double facing = 1.0 - simd::dot(p.h_o, x.longitude()) - s * x.height();
  return d * std::log(p.R) + d * std::log(p.ell_o) + std::log(facing) - (d + 1.0) * std::log(gap);
}

SpherePoint sample_uniform_cap(std::size_t d, double ell_o, Rng& rng, std::size_t* trials) {
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "dimension must be positive");
  if (!(ell_o >= 1.0 && ell_o <= 2.0))
    throw Error(ErrorCode::DomainError, "observer latitude must lie in [1, 2]");
  const double threshold = ell_o - 1.0;
  Vector z(d + 1);
  std::size_t n = 0;
  while (true) {
    ++n;
    fill_standard_normal(rng, z);
    const double norm2 = simd::sum_squares(z);
    if (!(norm2 > 0.0)) continue;
    if (z[d] / std::sqrt(norm2) < threshold) break;
  }
  if (trials) *trials = n;
  return SpherePoint(std::move(z));
}

double cap_ratio_exact(std::size_t d, double ell_o) {
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "dimension must be positive");
  if (!(ell_o >= 1.0 && ell_o <= 2.0))
    throw Error(ErrorCode::DomainError, "observer latitude must lie in [1, 2]");
  if (ell_o == 1.0) return 0.5;
  // The dark side is {z_{d+1} > s}: |z_{1:d}|^2 / z_{d+1}^2 < c with z_{d+1} > 0,
  // c = (1 - s^2)/s^2, i.e. half of P(chi2_d < c chi2_1).
  const double x = (2.0 - ell_o) * ell_o;  // c/(c+1) = 1 - s^2
  return 0.5 * regularized_incomplete_beta(x, 0.5 * static_cast<double>(d), 0.5);
}

double cap_ratio_bound(std::size_t d, double ell_o) {
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "dimension must be positive");
  if (!(ell_o > 1.0 && ell_o < 2.0))
    throw Error(ErrorCode::DomainError, "bound requires observer latitude in (1, 2)");
  const double dd = static_cast<double>(d);
  const double base = (2.0 - ell_o) * ell_o;
  return 0.5 * std::exp(0.5) * std::sqrt(dd + 1.0) * std::pow(base, 0.5 * (dd - 1.0));
}

}  // namespace brightside::geometry
