#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "cpdbench/bayesian.hpp"
#include "cpdbench/special.hpp"

namespace cpd {
namespace {

constexpr double kTiny = 1e-300;

// ln int_0^w0 w^((b-1)/2) (W + B w)^(-(n-1)/2) dw by Simpson's rule in log
// space; only reached when b >= n - 2 and the beta-function form breaks down.
double log_w_integral_numeric(double n, double b, double within, double between, double w0) {
  constexpr int intervals = 2000;
  const double h = w0 / intervals;
  std::vector<double> terms;
  terms.reserve(intervals + 1);
  for (int k = 0; k <= intervals; ++k) {
    const double w = k * h;
    const double weight = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    const double lw = (w == 0.0) ? (b == 1.0 ? 0.0 : math::kNegInf) : 0.5 * (b - 1.0) * std::log(w);
    terms.push_back(std::log(weight) + lw - 0.5 * (n - 1.0) * std::log(within + between * w));
  }
  return math::log_sum_exp(terms) + std::log(h / 3.0);
}

// Both integrals of the partition weight, with the pieces that depend only on
// the block count cached.
class PartitionWeight {
public:
  PartitionWeight(std::size_t n, double w0, double p0)
      : n_(static_cast<double>(n)), w0_(w0), p0_(p0), log_w0_(std::log(w0)),
        lp_(n + 2, std::nan("")), lbeta_w_(n + 2, std::nan("")) {}

  double operator()(std::size_t blocks, double within, double between) {
    return log_p_integral(blocks) + log_w_integral(blocks, within, between);
  }

private:
  double log_p_integral(std::size_t blocks) {
    double& slot = lp_[blocks];
    if (std::isnan(slot)) {
      const double a = static_cast<double>(blocks);
      const double c = n_ - a + 1.0;
      const double lb = math::log_beta(a, c);
      slot = p0_ >= 1.0 ? lb : lb + math::log_ibeta(a, c, p0_, lb);
    }
    return slot;
  }

  double log_w_integral(std::size_t blocks, double within, double between) {
    const double b = static_cast<double>(blocks);
    const double e = 0.5 * (n_ - 1.0);
    const double a = 0.5 * (b + 1.0);
    const double c = 0.5 * (n_ - b - 2.0);
    within = std::max(within, kTiny);
    if (!(between > 0.0)) {
      return -e * std::log(within) + a * log_w0_ - std::log(a);
    }
    if (c <= 0.0) return log_w_integral_numeric(n_, b, within, between, w0_);

    double& lb = lbeta_w_[blocks];
    if (std::isnan(lb)) lb = math::log_beta(a, c);
    const double log_w = std::log(within);
    const double log_b = std::log(between);
    const double log_denom = std::log(within + between * w0_);
    // u0 = B w0 / (W + B w0)
    const double log_u0 = log_b + log_w0_ - log_denom;
    const double log_1mu0 = log_w - log_denom;
    const double u0 = std::exp(log_u0);
    double log_i;
    if (u0 > (a + 1.0) / (a + c + 2.0)) {
      // Upper tail; skip the continued fraction when the complement is negligible.
      const double log_tail_front = c * log_1mu0 + a * log_u0 - lb - std::log(c);
      log_i = log_tail_front < -60.0 ? -std::exp(log_tail_front)
                                     : math::log_ibeta(a, c, u0, lb);
    } else {
      log_i = math::log_ibeta(a, c, u0, lb);
    }
    return (a - e) * log_w - a * log_b + lb + log_i;
  }

  double n_, w0_, p0_, log_w0_;
  std::vector<double> lp_;
  std::vector<double> lbeta_w_;
};

} // namespace

double bcp_log_partition_weight(std::size_t n, std::size_t blocks, double within, double between,
                                double w0, double p0) {
  if (blocks < 1 || blocks > n) throw std::invalid_argument("block count outside [1, n]");
  if (!(p0 > 0.0) || !(w0 > 0.0)) return math::kNegInf;
  PartitionWeight weight(n, w0, p0);
  return weight(blocks, within, between);
}

std::vector<double> bcp_posterior(std::span<const double> signal, const BcpConfig& config) {
  config.validate();
  const std::size_t n = signal.size();
  if (n < 3) throw std::invalid_argument("bcp needs at least 3 samples");

  std::vector<double> posterior(n, 0.0);
  if (!(config.p0 > 0.0) || !(config.w0 > 0.0)) return posterior;

  // The partition posterior is invariant to location and scale; centring keeps
  // the between-block sum of squares free of cancellation.
  const std::vector<double> x = normalize(signal);
  std::vector<double> prefix(n + 1, 0.0);
  double total_ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + x[i];
    total_ss += x[i] * x[i];
  }
  const double grand = prefix[n] * prefix[n] / static_cast<double>(n);
  const double within_floor = std::max(kTiny, 1e-12 * total_ss);
  auto block_q = [&](std::size_t begin, std::size_t end) {
    const double s = prefix[end] - prefix[begin];
    return s * s / static_cast<double>(end - begin);
  };

  PartitionWeight weight(n, config.w0, config.p0);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<char> change(n, 0);
  std::vector<std::size_t> next(n, n);
  std::vector<std::size_t> counts(n, 0);
  std::size_t blocks = 1;

  const std::size_t sweeps = config.burn_in + config.samples;
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    // Boundaries right of i are untouched while sweeping i upwards, so the
    // next-boundary table can be built once per sweep.
    std::size_t upcoming = n;
    for (std::size_t i = n; i-- > 1;) {
      next[i] = upcoming;
      if (change[i]) upcoming = i;
    }
    double q = 0.0;
    for (std::size_t begin = 0; begin < n;) {
      std::size_t end = begin + 1;
      while (end < n && !change[end]) ++end;
      q += block_q(begin, end);
      begin = end;
    }

    std::size_t prev = 0;
    const bool sampling = sweep >= config.burn_in;
    for (std::size_t i = 1; i < n; ++i) {
      const std::size_t r = next[i];
      const double merged = block_q(prev, r);
      const double split = block_q(prev, i) + block_q(i, r);
      const double q_rest = q - (change[i] ? split : merged);
      const double q_off = q_rest + merged;
      const double q_on = q_rest + split;
      const std::size_t b_off = blocks - (change[i] ? 1 : 0);

      const double lf_off =
          weight(b_off, std::max(total_ss - q_off, within_floor), std::max(q_off - grand, 0.0));
      const double lf_on =
          weight(b_off + 1, std::max(total_ss - q_on, within_floor), std::max(q_on - grand, 0.0));
      const double p_on = 1.0 / (1.0 + std::exp(lf_off - lf_on));

      const bool on = unif(rng) < p_on;
      change[i] = on ? 1 : 0;
      q = on ? q_on : q_off;
      blocks = b_off + (on ? 1 : 0);
      if (on) prev = i;
      if (sampling && on) ++counts[i];
    }
  }

  for (std::size_t i = 1; i < n; ++i) {
    posterior[i] = static_cast<double>(counts[i]) / static_cast<double>(config.samples);
  }
  return posterior;
}

ChangepointResult bcp_detect(std::span<const double> signal, const BcpConfig& config) {
  ChangepointResult result;
  result.detector = {Algorithm::bcp, config};
  const auto posterior = bcp_posterior(signal, config);
  for (std::size_t i = 1; i < posterior.size(); ++i) {
    if (posterior[i] > config.cutoff) {
      result.indices.push_back(i);
      result.scores.push_back(posterior[i]);
    }
  }
  return result;
}

ChangepointResult bcp_detect(const RRSeries& series, const BcpConfig& config) {
  return bcp_detect(series.intervals(), config);
}

} // namespace cpd
