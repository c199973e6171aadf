#pragma once

// Bayesian Blocks, the Barry-Hartigan product partition sampler, Bayesian
// online changepoint detection and its modified single-run variant.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "cpdbench/config.hpp"
#include "cpdbench/series.hpp"

namespace cpd {

// --- Bayesian Blocks -------------------------------------------------------

/// (sum x)^2 / (4 M) for a block of M points with unit error variance.
double bblocks_fitness(std::span<const double> data);

/// Maximizes sum_k fitness(block_k) - gamma * blocks exactly.
ChangepointResult bblocks_detect(std::span<const double> signal, const BBlocksConfig& config);
ChangepointResult bblocks_detect(const RRSeries& series, const BBlocksConfig& config);

// --- Barry-Hartigan product partition model --------------------------------

/// Log posterior weight of a partition with `blocks` blocks, within-block sum
/// of squares `within` and between-block sum of squares `between`, for n
/// observations, up to a constant shared by all partitions:
///   ln int_0^p0 p^(b-1) (1-p)^(n-b) dp + ln int_0^w0 w^((b-1)/2) / (W + B w)^((n-1)/2) dw
/// Returns -inf when p0 or w0 is zero.
double bcp_log_partition_weight(std::size_t n, std::size_t blocks, double within,
                                double between, double w0, double p0);

/// Posterior change probability for every boundary index; element i refers to
/// a change between beat i-1 and beat i (element 0 is always 0).
std::vector<double> bcp_posterior(std::span<const double> signal, const BcpConfig& config);

ChangepointResult bcp_detect(std::span<const double> signal, const BcpConfig& config);
ChangepointResult bcp_detect(const RRSeries& series, const BcpConfig& config);

// --- BOCD ------------------------------------------------------------------

/// Normal-inverse-gamma hyperparameters of one run.
struct NigParams {
  double mu;
  double nu;
  double alpha;
  double beta;

  static NigParams prior(const BocdConfig& config) {
    return {config.mu0, config.nu0, config.alpha0, config.beta0};
  }
  /// Student-t predictive: 2 alpha dof, centre mu, scale^2 beta (nu + 1) / (alpha nu).
  double log_predictive(double x) const;
  NigParams updated(double x) const;
};

/// Filtering state after t observations. Entries are ordered by run length;
/// with pruning disabled there are exactly t + 1 of them (run lengths 0..t).
struct BocdState {
  std::size_t t = 0;
  std::vector<std::size_t> run_length;
  std::vector<double> log_prob;  // normalized: log P(r_t | x_1:t)
  std::vector<NigParams> params;

  std::size_t map_run_length() const;
};

BocdState bocd_initial_state(const BocdConfig& config);

/// One Adams-MacKay update with constant hazard 1/lambda. Entries whose log
/// probability falls more than `prune_below` below the maximum are dropped;
/// the default keeps the full support.
BocdState bocd_step(BocdState state, double x, const BocdConfig& config,
                    double prune_below = std::numeric_limits<double>::infinity());

struct RunLengthPosterior {
  std::vector<std::vector<double>> probs;  // probs[t-1][r] = P(r_t = r | x_1:t)
  std::vector<std::size_t> map_run_length;
};

/// Exact run-length posterior (quadratic memory; intended for short series).
RunLengthPosterior bocd_posterior(std::span<const double> signal, const BocdConfig& config);

/// MAP run length after each observation, with negligible hypotheses pruned.
std::vector<std::size_t> bocd_map_trace(std::span<const double> signal, const BocdConfig& config);

/// Changepoint index t - r + 1 whenever the MAP run length r after
/// observation t (0-based) drops below its value at the previous step.
/// Indices outside [1, N-1] are discarded and duplicates merged.
std::vector<std::size_t> changepoints_from_map_trace(std::span<const std::size_t> trace);

ChangepointResult bocd_detect(std::span<const double> signal, const BocdConfig& config);
ChangepointResult bocd_detect(const RRSeries& series, const BocdConfig& config);

// --- Modified BOCD -----------------------------------------------------------

/// Run length since the last reset after each observation: 0 where the
/// changepoint probability P(r_t = 0 | x_1:t) = H beat the growth term
/// (1 - H) sum_r P(r_t-1 = r | x_1:t-1) pi_r(x_t) of the run-length filter,
/// previous + 1 otherwise. A reset restarts the filter from the prior.
std::vector<std::size_t> mbocd_run_lengths(std::span<const double> signal, const BocdConfig& config);

ChangepointResult mbocd_detect(std::span<const double> signal, const BocdConfig& config);
ChangepointResult mbocd_detect(const RRSeries& series, const BocdConfig& config);

} // namespace cpd
