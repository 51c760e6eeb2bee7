#include "brightside/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "brightside/error.hpp"

namespace brightside {
namespace {

constexpr int kMaxIterations = 100000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

double lgamma_positive(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

// Continued fraction for I_x(a,b); converges rapidly for x < (a+1)/(a+b+2).
double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) return h;
  }
  throw Error(ErrorCode::DomainError, "incomplete beta continued fraction did not converge");
}

// log of the lower-branch value, valid when x <= (a+1)/(a+b+2).
double log_lower_branch(double log_x, double log1m_x, double x, double a, double b) {
  const double log_front = a * log_x + b * log1m_x - log_beta(a, b) - std::log(a);
  return log_front + std::log(beta_continued_fraction(x, a, b));
}

void check_shape(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw Error(ErrorCode::DomainError,
                "incomplete beta requires a > 0 and b > 0, got a=" + std::to_string(a) +
                    " b=" + std::to_string(b));
}

}  // namespace

double log_beta(double a, double b) {
  return lgamma_positive(a) + lgamma_positive(b) - lgamma_positive(a + b);
}

double regularized_incomplete_beta(double x, double a, double b) {
  check_shape(a, b);
  if (!(x >= 0.0 && x <= 1.0))
    throw Error(ErrorCode::DomainError, "incomplete beta requires x in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  if (x > (a + 1.0) / (a + b + 2.0)) {
    const double y = 1.0 - x;
    return 1.0 - std::exp(log_lower_branch(std::log(y), std::log1p(-y), y, b, a));
  }
  return std::exp(log_lower_branch(std::log(x), std::log1p(-x), x, a, b));
}

double log_regularized_incomplete_beta(double log_x, double log1m_x, double a, double b) {
  check_shape(a, b);
  if (log_x > 0.0 || log1m_x > 0.0 || std::isnan(log_x) || std::isnan(log1m_x))
    throw Error(ErrorCode::DomainError, "log incomplete beta requires log x <= 0");
  if (log_x == -std::numeric_limits<double>::infinity()) return log_x;
  if (log1m_x == -std::numeric_limits<double>::infinity()) return 0.0;
  const double x = std::exp(log_x);
  if (x > (a + 1.0) / (a + b + 2.0)) {
    const double upper = std::exp(log_lower_branch(log1m_x, log_x, std::exp(log1m_x), b, a));
    return std::log1p(-upper);
  }
  return log_lower_branch(log_x, log1m_x, x, a, b);
}

double student_t_log_pdf(double t, double nu) {
  const double log_norm = lgamma_positive(0.5 * (nu + 1.0)) - lgamma_positive(0.5 * nu) -
                          0.5 * std::log(nu * std::numbers::pi);
  const double t2 = t * t;
  double log_kernel;
  if (std::isfinite(t2)) {
    log_kernel = std::log1p(t2 / nu);
  } else {
    const double la = std::log(std::fabs(t));
    log_kernel = 2.0 * la - std::log(nu);
  }
  return log_norm - 0.5 * (nu + 1.0) * log_kernel;
}

namespace {

// log P(T <= -|t|) for the Student-t law: (1/2) I_{nu/(nu+t^2)}(nu/2, 1/2).
double log_lower_tail(double abs_t, double nu) {
  const double t2 = abs_t * abs_t;
  double log_x;
  double log1m_x;
  if (std::isfinite(t2) && t2 > 0.0) {
    log_x = -std::log1p(t2 / nu);
    log1m_x = -std::log1p(nu / t2);
  } else if (t2 == 0.0) {
    return std::log(0.5);
  } else {
    log_x = std::log(nu) - 2.0 * std::log(abs_t);
    log1m_x = 0.0;
  }
  return std::log(0.5) + log_regularized_incomplete_beta(log_x, log1m_x, 0.5 * nu, 0.5);
}

}  // namespace

double student_t_cdf(double t, double nu) {
  if (!(nu > 0.0)) throw Error(ErrorCode::DomainError, "Student-t requires nu > 0");
  if (std::isnan(t)) throw Error(ErrorCode::NonfiniteInput, "Student-t cdf of NaN");
  if (t == 0.0) return 0.5;
  const double tail = std::exp(log_lower_tail(std::fabs(t), nu));
  return t < 0.0 ? tail : 1.0 - tail;
}

double student_t_log_cdf(double t, double nu) {
  if (!(nu > 0.0)) throw Error(ErrorCode::DomainError, "Student-t requires nu > 0");
  if (std::isnan(t)) throw Error(ErrorCode::NonfiniteInput, "Student-t cdf of NaN");
  if (t == 0.0) return std::log(0.5);
  const double log_tail = log_lower_tail(std::fabs(t), nu);
  return t < 0.0 ? log_tail : std::log1p(-std::exp(log_tail));
}

double student_t_log_cdf_derivative(double t, double nu) {
  return std::exp(student_t_log_pdf(t, nu) - student_t_log_cdf(t, nu));
}

double log_sigmoid(double t) {
  if (t >= 0.0) return -std::log1p(std::exp(-t));
  return t - std::log1p(std::exp(t));
}

}  // namespace brightside
