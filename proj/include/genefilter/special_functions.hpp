#pragma once

// Distribution tail probabilities built on the regularized incomplete beta function.

namespace genefilter::stats {

double log_beta(double a, double b);

// I_x(a, b) for a, b > 0 and x in [0, 1].
double incomplete_beta(double a, double b, double x);

// Two-sided P(|T| >= |t|) for Student's t with `dof` degrees of freedom (dof > 0, may be fractional).
double student_t_two_sided(double t, double dof);

// Upper tail P(F >= f) of the F distribution with (d1, d2) degrees of freedom.
double f_upper_tail(double f, double d1, double d2);

// Two-sided P(|Z| >= |z|) for a standard normal Z.
double normal_two_sided(double z);

} // namespace genefilter::stats
