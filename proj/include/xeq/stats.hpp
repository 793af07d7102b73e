#pragma once

#include <span>

namespace xeq::stats {

double sum(std::span<const double> xs);
double mean(std::span<const double> xs);

// Unbiased (N-1) sample variance. The whole toolkit uses this convention;
// mixing conventions would change Cronbach's alpha.
double sample_variance(std::span<const double> xs);
double sample_sd(std::span<const double> xs);

bool is_constant(std::span<const double> xs);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double ibeta(double a, double b, double x);

// Two-sided p for a t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// P(F' > f) for an F statistic with (d1, d2) degrees of freedom.
double f_survival(double f, double d1, double d2);

double normal_cdf(double z);

}  // namespace xeq::stats
