#pragma once

// Offline detectors driven by a test statistic (RMDM) or by a penalized
// segment cost (binary segmentation, PELT).

#include <cstddef>
#include <span>
#include <vector>

#include "cpdbench/config.hpp"
#include "cpdbench/series.hpp"

namespace cpd {

/// Cost of one segment computed directly from its values.
///   mean              sum of squared deviations from the segment mean
///   mean_and_variance n ln(sigma^2) with sigma^2 the segment MLE variance
///   rms               n ln(mean square), i.e. a zero-mean Gaussian whose
///                     scale tracks the segment RMS level
///   linear            residual sum of squares of the least-squares line
/// Throws std::invalid_argument when data is shorter than min_segment_length.
double segment_cost(std::span<const double> data, CostKind kind);

/// Shortest admissible segment for a cost: 1, 2, 1, 3 respectively.
std::size_t min_segment_length(CostKind kind);

/// O(1) segment costs over [begin, end) of a fixed signal via prefix sums.
class SegmentCost {
public:
  SegmentCost(std::span<const double> signal, CostKind kind);

  double operator()(std::size_t begin, std::size_t end) const;
  std::size_t min_length() const { return min_length_; }
  std::size_t size() const { return n_; }

private:
  CostKind kind_;
  std::size_t n_;
  std::size_t min_length_;
  std::vector<double> sum_;    // prefix sums, size n + 1
  std::vector<double> sum_sq_;
  std::vector<double> sum_tx_; // sum of i * x_i, linear cost only
};

/// Penalized objective sum_k C(segment_k) + beta * (number of changepoints).
double penalized_cost(std::span<const double> signal, std::span<const std::size_t> changepoints,
                      const CostPenaltyConfig& config);

// --- RMDM ----------------------------------------------------------------

/// |mu1 - mu2| / sqrt(sigma_p), sigma_p = (V1 + V2) / (N1 + N2 - 2) * (1/N1 + 1/N2).
/// Zero pooled variance returns +inf when the means differ and 0 otherwise.
double rmdm_t_statistic(std::span<const double> left, std::span<const double> right);

/// {1 - I_[nu/(nu+t^2)](delta nu, delta)}^gamma, gamma = 4.19 ln n - 11.54,
/// delta = 0.40, nu = n - 1. Throws std::domain_error when gamma <= 0.
double rmdm_significance(double t_max, std::size_t n);

/// Two-sided Student-t confidence 1 - p for a two-sample statistic.
double two_sample_significance(double t, std::size_t n1, std::size_t n2);

ChangepointResult rmdm_detect(std::span<const double> signal, const RmdmConfig& config);
ChangepointResult rmdm_detect(const RRSeries& series, const RmdmConfig& config);

// --- Binary segmentation and PELT ------------------------------------------

ChangepointResult binseg_detect(std::span<const double> signal, const CostPenaltyConfig& config);
ChangepointResult binseg_detect(const RRSeries& series, const CostPenaltyConfig& config);

ChangepointResult pelt_detect(std::span<const double> signal, const CostPenaltyConfig& config);
ChangepointResult pelt_detect(const RRSeries& series, const CostPenaltyConfig& config);

} // namespace cpd
