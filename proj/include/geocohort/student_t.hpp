#pragma once

namespace geocohort {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation
/// (modified Lentz) with relative tolerance 1e-15.
double regularized_incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

/// Two-tailed p-value P(|T| >= |t|).
double student_t_two_tailed_p(double t, double df);

}  // namespace geocohort
