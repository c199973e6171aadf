#pragma once

// Special functions used by the significance model, the product-partition
// sampler and the conjugate predictive densities.

#include <limits>
#include <span>

namespace cpd::math {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_beta(double a, double b);

/// ln I_x(a, b), the log of the regularized incomplete beta function.
/// Stays accurate far into the lower tail where I_x itself underflows.
double log_ibeta(double a, double b, double x);
/// Same, with ln B(a, b) supplied by the caller.
double log_ibeta(double a, double b, double x, double log_beta_ab);

double ibeta(double a, double b, double x);

/// Log density of a location-scale Student-t with `df` degrees of freedom,
/// centre `loc` and squared scale `scale2`.
double student_t_logpdf(double x, double df, double loc, double scale2);

double log_sum_exp(std::span<const double> values);
double log_add_exp(double a, double b);

} // namespace cpd::math
