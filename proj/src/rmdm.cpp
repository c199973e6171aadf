#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "cpdbench/frequentist.hpp"
#include "cpdbench/special.hpp"

namespace cpd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest series for which the exponent 4.19 ln N - 11.54 is positive.
constexpr std::size_t kMinModelLength = 16;

double pooled_t(double n1, double s1, double ss1, double n2, double s2, double ss2) {
  const double mu1 = s1 / n1;
  const double mu2 = s2 / n2;
  const double v1 = std::max(0.0, ss1 - s1 * mu1);
  const double v2 = std::max(0.0, ss2 - s2 * mu2);
  const double sigma_p = (v1 + v2) / (n1 + n2 - 2.0) * (1.0 / n1 + 1.0 / n2);
  const double diff = std::fabs(mu1 - mu2);
  if (!(sigma_p > 0.0)) return diff > 0.0 ? kInf : 0.0;
  return diff / std::sqrt(sigma_p);
}

} // namespace

double rmdm_t_statistic(std::span<const double> left, std::span<const double> right) {
  if (left.size() < 2 || right.size() < 2) {
    throw std::invalid_argument("t statistic needs at least two samples per side");
  }
  auto moments = [](std::span<const double> xs) {
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - mean) * (x - mean);
    return std::pair{mean, v};
  };
  const auto [mu1, v1] = moments(left);
  const auto [mu2, v2] = moments(right);
  const double n1 = static_cast<double>(left.size());
  const double n2 = static_cast<double>(right.size());
  const double sigma_p = (v1 + v2) / (n1 + n2 - 2.0) * (1.0 / n1 + 1.0 / n2);
  const double diff = std::fabs(mu1 - mu2);
  if (!(sigma_p > 0.0)) return diff > 0.0 ? kInf : 0.0;
  return diff / std::sqrt(sigma_p);
}

double rmdm_significance(double t_max, std::size_t n) {
  if (n < 4) throw std::invalid_argument("significance needs n >= 4");
  if (!(t_max >= 0.0)) throw std::invalid_argument("t_max must be non-negative");
  const double len = static_cast<double>(n);
  const double gamma = 4.19 * std::log(len) - 11.54;
  if (!(gamma > 0.0)) throw std::domain_error("series too short for significance model");
  if (t_max == 0.0) return 0.0;
  if (std::isinf(t_max)) return 1.0;

  constexpr double delta = 0.40;
  const double nu = len - 1.0;
  // 1 - I_x(delta nu, delta) == I_{1-x}(delta, delta nu), x = nu / (nu + t^2)
  const double y = t_max * t_max / (nu + t_max * t_max);
  const double log_base = math::log_ibeta(delta, delta * nu, y);
  return std::exp(gamma * log_base);
}

double two_sample_significance(double t, std::size_t n1, std::size_t n2) {
  if (n1 + n2 < 3) throw std::invalid_argument("two-sample test needs n1 + n2 >= 3");
  if (std::isinf(t)) return 1.0;
  if (t <= 0.0) return 0.0;
  const double nu = static_cast<double>(n1 + n2 - 2);
  // two-sided p = I_{nu/(nu+t^2)}(nu/2, 1/2); confidence = I_{t^2/(nu+t^2)}(1/2, nu/2)
  return math::ibeta(0.5, 0.5 * nu, t * t / (nu + t * t));
}

ChangepointResult rmdm_detect(std::span<const double> signal, const RmdmConfig& config) {
  config.validate();
  ChangepointResult result;
  result.detector = {Algorithm::rmdm, config};

  const std::size_t n = signal.size();
  const std::size_t l0 = config.l0;
  if (n < 2 * l0) {
    result.warnings.push_back("series shorter than 2*l0; no split attempted");
    return result;
  }

  std::vector<double> sum(n + 1, 0.0), sum_sq(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sum[i + 1] = sum[i] + signal[i];
    sum_sq[i + 1] = sum_sq[i] + signal[i] * signal[i];
  }

  std::vector<std::pair<std::size_t, double>> accepted;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, n}};
  while (!stack.empty()) {
    const auto [lo, hi] = stack.back();
    stack.pop_back();
    const std::size_t len = hi - lo;
    if (len < 2 * l0 || len < kMinModelLength) continue;

    const double s_all = sum[hi] - sum[lo];
    const double ss_all = sum_sq[hi] - sum_sq[lo];
    double t_max = -1.0;
    std::size_t j_max = 0;
    for (std::size_t j = lo + l0; j + l0 <= hi; ++j) {
      const double n1 = static_cast<double>(j - lo);
      const double s1 = sum[j] - sum[lo];
      const double ss1 = sum_sq[j] - sum_sq[lo];
      const double t = pooled_t(n1, s1, ss1, static_cast<double>(hi - j), s_all - s1, ss_all - ss1);
      if (t > t_max) {
        t_max = t;
        j_max = j;
      }
    }
    if (t_max <= 0.0) continue;

    const double significance = rmdm_significance(t_max, len);
    if (!(significance > config.p0)) continue;
    if (!(two_sample_significance(t_max, j_max - lo, hi - j_max) > config.p0)) continue;

    accepted.emplace_back(j_max, significance);
    stack.emplace_back(j_max, hi);
    stack.emplace_back(lo, j_max);
  }

  std::sort(accepted.begin(), accepted.end());
  for (const auto& [index, score] : accepted) {
    result.indices.push_back(index);
    result.scores.push_back(score);
  }
  return result;
}

ChangepointResult rmdm_detect(const RRSeries& series, const RmdmConfig& config) {
  if (series.empty()) return rmdm_detect(std::span<const double>{}, config);
  return rmdm_detect(normalize(series), config);
}

} // namespace cpd
