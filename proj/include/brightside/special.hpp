#pragma once

// Special functions needed by the cap-area formulas and the Student-t family.

namespace brightside {

// I_x(a, b), the regularized incomplete beta function. Continued fraction
// (modified Lentz) with the reflection I_x(a,b) = 1 - I_{1-x}(b,a) applied when
// x > (a+1)/(a+b+2). Throws DomainError unless x in [0,1], a > 0, b > 0.
double regularized_incomplete_beta(double x, double a, double b);

// log I_x(a, b) without underflow for tiny x. `log_x` and `log1m_x` must be
// log(x) and log(1-x); passing them separately keeps precision when x is
// produced by a ratio that would round to 0 or 1.
double log_regularized_incomplete_beta(double log_x, double log1m_x, double a, double b);

double log_beta(double a, double b);

// Univariate Student-t with `nu` degrees of freedom, standard location/scale.
double student_t_log_pdf(double t, double nu);
double student_t_cdf(double t, double nu);
double student_t_log_cdf(double t, double nu);

// d/dt log T_nu(t) = pdf/cdf, evaluated in log space.
double student_t_log_cdf_derivative(double t, double nu);

double log_sigmoid(double t);

}  // namespace brightside
