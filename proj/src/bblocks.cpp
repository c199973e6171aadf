#include <algorithm>
#include <limits>
#include <stdexcept>

#include "cpdbench/bayesian.hpp"

namespace cpd {

double bblocks_fitness(std::span<const double> data) {
  if (data.empty()) return 0.0;
  double s = 0.0;
  for (double v : data) s += v;
  return s * s / (4.0 * static_cast<double>(data.size()));
}

// best[t] is the optimal total fitness of the first t points. Splitting a
// block never lowers its summed fitness (Cauchy-Schwarz), so a start r with
// best[r] + f(r, t) < best[t] can never again be the optimal last block start.
ChangepointResult bblocks_detect(std::span<const double> signal, const BBlocksConfig& config) {
  config.validate();
  const std::size_t n = signal.size();
  if (n < 2) throw std::invalid_argument("bayesian blocks needs at least 2 samples");

  ChangepointResult result;
  result.detector = {Algorithm::bblocks, config};

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + signal[i];
  auto fitness = [&](std::size_t begin, std::size_t end) {
    const double s = prefix[end] - prefix[begin];
    return s * s / (4.0 * static_cast<double>(end - begin));
  };

  std::vector<double> best(n + 1, 0.0);
  std::vector<std::size_t> start(n + 1, 0);
  std::vector<double> scratch(n + 1, 0.0);
  std::vector<std::size_t> candidates;
  for (std::size_t t = 1; t <= n; ++t) {
    candidates.push_back(t - 1);
    double top = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t r : candidates) {
      const double v = best[r] + fitness(r, t);
      scratch[r] = v;
      if (v - config.gamma > top) {
        top = v - config.gamma;
        arg = r;
      }
    }
    best[t] = top;
    start[t] = arg;
    std::erase_if(candidates, [&](std::size_t r) { return scratch[r] < top; });
  }

  for (std::size_t t = n; start[t] > 0; t = start[t]) result.indices.push_back(start[t]);
  std::reverse(result.indices.begin(), result.indices.end());
  return result;
}

ChangepointResult bblocks_detect(const RRSeries& series, const BBlocksConfig& config) {
  if (series.size() < 2) throw std::invalid_argument("bayesian blocks needs at least 2 samples");
  return bblocks_detect(normalize(series), config);
}

} // namespace cpd
