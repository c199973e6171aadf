#include <algorithm>
#include <stdexcept>
#include <utility>

#include "cpdbench/frequentist.hpp"

namespace cpd {

ChangepointResult binseg_detect(std::span<const double> signal, const CostPenaltyConfig& config) {
  config.validate();
  const std::size_t n = signal.size();
  if (n < 4) throw std::invalid_argument("binary segmentation needs at least 4 samples");

  ChangepointResult result;
  result.detector = {Algorithm::binseg, config};

  const SegmentCost cost(signal, config.cost);
  const std::size_t min_len = cost.min_length();
  const double beta = config.penalty_value(n);

  std::vector<std::pair<std::size_t, double>> accepted;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, n}};
  while (!stack.empty()) {
    const auto [lo, hi] = stack.back();
    stack.pop_back();
    if (hi - lo < 2 * min_len) continue;

    const double whole = cost(lo, hi);
    double best_split_cost = 0.0;
    std::size_t best = 0;
    for (std::size_t tau = lo + min_len; tau + min_len <= hi; ++tau) {
      const double split = cost(lo, tau) + cost(tau, hi);
      if (best == 0 || split < best_split_cost) {
        best_split_cost = split;
        best = tau;
      }
    }
    if (best == 0 || !(best_split_cost + beta < whole)) continue;

    accepted.emplace_back(best, whole - best_split_cost);
    stack.emplace_back(best, hi);
    stack.emplace_back(lo, best);
  }

  std::sort(accepted.begin(), accepted.end());
  for (const auto& [index, gain] : accepted) {
    result.indices.push_back(index);
    result.scores.push_back(gain);
  }
  return result;
}

ChangepointResult binseg_detect(const RRSeries& series, const CostPenaltyConfig& config) {
  if (series.size() < 4) throw std::invalid_argument("binary segmentation needs at least 4 samples");
  return binseg_detect(normalize(series), config);
}

} // namespace cpd
