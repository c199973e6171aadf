#include "cpdbench/special.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpd::math {
namespace {

// Continued fraction for the incomplete beta function, modified Lentz.
double betacf(double a, double b, double x) {
  constexpr double eps = 1e-16;
  constexpr double fpmin = 1e-300;
  const int max_iter = 200 + static_cast<int>(20.0 * std::sqrt(std::max(a, b)));

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

} // namespace

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_ibeta(double a, double b, double x) {
  return log_ibeta(a, b, x, log_beta(a, b));
}

double log_ibeta(double a, double b, double x, double log_beta_ab) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("incomplete beta: a and b must be positive");
  if (std::isnan(x)) return x;
  if (x <= 0.0) return kNegInf;
  if (x >= 1.0) return 0.0;

  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta_ab;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return log_front - std::log(a) + std::log(betacf(a, b, x));
  }
  // Upper region: I = 1 - I_{1-x}(b, a).
  const double log_tail_front = log_front - std::log(b);
  if (log_tail_front < -60.0) return -std::exp(log_tail_front);
  const double log_tail = log_tail_front + std::log(betacf(b, a, 1.0 - x));
  return std::log1p(-std::exp(log_tail));
}

double ibeta(double a, double b, double x) {
  return std::exp(log_ibeta(a, b, x));
}

double student_t_logpdf(double x, double df, double loc, double scale2) {
  const double z2 = (x - loc) * (x - loc) / scale2;
  return std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
         0.5 * std::log(df * M_PI * scale2) - 0.5 * (df + 1.0) * std::log1p(z2 / df);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  const double hi = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

} // namespace cpd::math
