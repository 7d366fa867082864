#pragma once

namespace brainalign::stats {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// P(T > t) for Student t with `df` degrees of freedom.
double student_t_upper(double t, double df);

/// P(Z > z) for a standard normal.
double normal_upper(double z);

} // namespace brainalign::stats
