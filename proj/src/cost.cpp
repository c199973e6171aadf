#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cpdbench/frequentist.hpp"

namespace cpd {
namespace {

// Keeps log-variance costs finite on exactly flat segments.
constexpr double kVarianceFloor = 1e-12;

double log_variance_cost(double n, double variance) {
  return n * std::log(std::max(variance, kVarianceFloor));
}

} // namespace

std::size_t min_segment_length(CostKind kind) {
  switch (kind) {
    case CostKind::mean: return 1;
    case CostKind::mean_and_variance: return 2;
    case CostKind::rms: return 1;
    case CostKind::linear: return 3;
  }
  return 1;
}

double segment_cost(std::span<const double> data, CostKind kind) {
  if (data.size() < min_segment_length(kind)) {
    throw std::invalid_argument("segment too short for cost '" + std::string(to_string(kind)) + "'");
  }
  const double n = static_cast<double>(data.size());
  double mean = 0.0;
  for (double v : data) mean += v;
  mean /= n;
  double sxx = 0.0;
  for (double v : data) sxx += (v - mean) * (v - mean);

  switch (kind) {
    case CostKind::mean: return sxx;
    case CostKind::mean_and_variance: return log_variance_cost(n, sxx / n);
    case CostKind::rms: {
      double ss = 0.0;
      for (double v : data) ss += v * v;
      return log_variance_cost(n, ss / n);
    }
    case CostKind::linear: {
      const double t_mean = (n - 1.0) / 2.0;
      double stt = 0.0, stx = 0.0;
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double dt = static_cast<double>(i) - t_mean;
        stt += dt * dt;
        stx += dt * (data[i] - mean);
      }
      return std::max(0.0, sxx - stx * stx / stt);
    }
  }
  return 0.0;
}

SegmentCost::SegmentCost(std::span<const double> signal, CostKind kind)
    : kind_(kind), n_(signal.size()), min_length_(min_segment_length(kind)) {
  sum_.assign(n_ + 1, 0.0);
  sum_sq_.assign(n_ + 1, 0.0);
  if (kind_ == CostKind::linear) sum_tx_.assign(n_ + 1, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    sum_[i + 1] = sum_[i] + signal[i];
    sum_sq_[i + 1] = sum_sq_[i] + signal[i] * signal[i];
    if (kind_ == CostKind::linear) sum_tx_[i + 1] = sum_tx_[i] + static_cast<double>(i) * signal[i];
  }
}

double SegmentCost::operator()(std::size_t begin, std::size_t end) const {
  const double n = static_cast<double>(end - begin);
  const double s = sum_[end] - sum_[begin];
  const double ss = sum_sq_[end] - sum_sq_[begin];
  const double sxx = std::max(0.0, ss - s * s / n);
  switch (kind_) {
    case CostKind::mean: return sxx;
    case CostKind::mean_and_variance: return log_variance_cost(n, sxx / n);
    case CostKind::rms: return log_variance_cost(n, ss / n);
    case CostKind::linear: {
      if (end - begin < 3) return 0.0;
      const double offset = static_cast<double>(begin);
      const double st = n * (n - 1.0) / 2.0;
      const double stx_raw = (sum_tx_[end] - sum_tx_[begin]) - offset * s;
      const double stx = stx_raw - st * s / n;
      const double stt = n * (n * n - 1.0) / 12.0;
      return std::max(0.0, sxx - stx * stx / stt);
    }
  }
  return 0.0;
}

double penalized_cost(std::span<const double> signal, std::span<const std::size_t> changepoints,
                      const CostPenaltyConfig& config) {
  check_changepoints(changepoints, signal.size());
  double total = 0.0;
  std::size_t begin = 0;
  for (std::size_t k = 0; k <= changepoints.size(); ++k) {
    const std::size_t end = k < changepoints.size() ? changepoints[k] : signal.size();
    total += segment_cost(signal.subspan(begin, end - begin), config.cost);
    begin = end;
  }
  return total + config.penalty_value(signal.size()) * static_cast<double>(changepoints.size());
}

} // namespace cpd
