#include <algorithm>
#include <limits>
#include <stdexcept>

#include "cpdbench/frequentist.hpp"

namespace cpd {

// Optimal partitioning with PELT pruning (K = 0). Every implemented cost is
// sub-additive for segments of at least min_length samples, so a candidate t
// with F(t) + C(t, s) > F(s) loses to s for every end point T >= s + min_length.
// Removal is deferred until then because s is not yet an admissible last
// changepoint for closer end points.
ChangepointResult pelt_detect(std::span<const double> signal, const CostPenaltyConfig& config) {
  config.validate();
  const std::size_t n = signal.size();
  if (n < 4) throw std::invalid_argument("PELT needs at least 4 samples");

  ChangepointResult result;
  result.detector = {Algorithm::pelt1, config};

  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t never = std::numeric_limits<std::size_t>::max();
  const SegmentCost cost(signal, config.cost);
  const std::size_t min_len = cost.min_length();
  const double beta = config.penalty_value(n);

  std::vector<double> best(n + 1, inf);
  std::vector<std::size_t> last(n + 1, 0);
  std::vector<std::size_t> prune_at(n + 1, never);
  std::vector<double> scratch(n + 1, 0.0);
  best[0] = -beta;

  std::vector<std::size_t> candidates;
  for (std::size_t s = 1; s <= n; ++s) {
    if (s >= min_len) {
      const std::size_t fresh = s - min_len;
      if (fresh == 0 || fresh >= min_len) candidates.push_back(fresh);
    }
    std::erase_if(candidates, [&](std::size_t t) { return prune_at[t] <= s; });
    if (candidates.empty()) continue;

    double f = inf;
    std::size_t arg = 0;
    for (std::size_t t : candidates) {
      const double partial = best[t] + cost(t, s);
      scratch[t] = partial;
      if (partial + beta < f) {
        f = partial + beta;
        arg = t;
      }
    }
    best[s] = f;
    last[s] = arg;
    for (std::size_t t : candidates) {
      if (prune_at[t] == never && scratch[t] > f) prune_at[t] = s + min_len;
    }
  }

  for (std::size_t s = n; last[s] > 0; s = last[s]) result.indices.push_back(last[s]);
  std::reverse(result.indices.begin(), result.indices.end());
  return result;
}

ChangepointResult pelt_detect(const RRSeries& series, const CostPenaltyConfig& config) {
  if (series.size() < 4) throw std::invalid_argument("PELT needs at least 4 samples");
  return pelt_detect(normalize(series), config);
}

} // namespace cpd
