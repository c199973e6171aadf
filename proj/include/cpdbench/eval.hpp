#pragma once

// Tolerance-based matching, per-series metrics, corpus aggregation, grid
// search over detector parameters and perturbation/tolerance sweeps.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cpdbench/config.hpp"
#include "cpdbench/series.hpp"

namespace cpd {

struct MatchConfig {
  std::size_t tolerance = 3;  // beats
};

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// Walks the truth in increasing order; each true changepoint takes the
/// earliest unused estimate within the tolerance. For sorted inputs this
/// reaches the size of a maximum bipartite matching.
MatchCounts match_changepoints(std::span<const std::size_t> truth,
                               std::span<const std::size_t> estimated, std::size_t tolerance);

struct EvalReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double tpr = 0.0;
  double ppv = 0.0;
  double f1 = 0.0;
  double fp_per_hour = 0.0;
};

/// tpr = 1 when there is nothing to find, ppv = 1 when nothing was claimed,
/// f1 = 2tp / (2tp + fp + fn) and 1 when that denominator is zero.
EvalReport make_report(const MatchCounts& counts, double duration_hours);

/// Throws std::invalid_argument("ground truth required") without annotations.
EvalReport evaluate(const RRSeries& series, const ChangepointResult& result,
                    const MatchConfig& config);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

struct EvalSummary {
  std::size_t series = 0;
  MeanStd tpr, ppv, f1, fp_per_hour;
};

EvalSummary summarize(std::span<const EvalReport> reports);

// --- grid search -------------------------------------------------------------

using CostPenalty = std::pair<CostKind, PenaltyKind>;

struct GridSpec {
  std::vector<std::size_t> rmdm_l0;
  std::vector<CostPenalty> binseg;
  std::vector<CostPenalty> pelt1;
  std::vector<CostPenalty> pelt2;
  std::vector<double> bblocks_gamma;
  std::vector<double> bcp_w0;
  std::vector<double> bcp_p0;
  std::vector<double> bcp_cutoff;
  std::vector<double> bocd_lambda;
  std::vector<double> mbocd_lambda;

  /// The published search ranges.
  static GridSpec defaults();

  /// Grid points in declaration order. For BCP this is the (w0, p0) stage,
  /// run at the default cutoff.
  std::vector<DetectorConfig> candidates(Algorithm algo) const;
};

struct GridRow {
  int stage = 1;
  DetectorConfig config;
  EvalSummary summary;
};

struct GridResult {
  DetectorConfig best;
  std::vector<GridRow> table;
};

/// Maximizes mean F1 over the corpus; the first grid point wins ties. BCP is
/// searched in two stages: (w0, p0) first, then the cutoff applied to the
/// cached posteriors of the winner. Throws std::invalid_argument for an empty
/// corpus or a series without truth.
GridResult grid_search(Algorithm algo, const GridSpec& grid, std::span<const RRSeries> corpus,
                       const MatchConfig& match, std::size_t jobs = 1);

/// stage,params,f1_mean,f1_std,tpr_mean,tpr_std,ppv_mean,ppv_std,fp_per_hour_mean,fp_per_hour_std
std::string grid_table_csv(const GridResult& result);

// --- sweeps --------------------------------------------------------------------

enum class SweepAxis { noise, ectopy, tolerance };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view id);

struct SweepRow {
  Algorithm algo;
  double axis_value = 0.0;
  EvalSummary summary;
};

/// For noise/ectopy, series k is perturbed with seed derive_seed(perturb_seed, k)
/// at every axis value (value 0 leaves it untouched) and evaluated at
/// `match.tolerance`. For tolerance, detection runs once per series and the
/// axis values are the tolerances. Rows are ordered by detector, then value.
std::vector<SweepRow> sweep(std::span<const DetectorConfig> detectors,
                            std::span<const RRSeries> corpus, SweepAxis axis,
                            std::span<const double> values, const MatchConfig& match,
                            std::uint64_t perturb_seed, std::size_t jobs = 1);

/// algo,axis_value,tpr_mean,tpr_std,ppv_mean,ppv_std,fp_per_hour_mean,fp_per_hour_std
std::string sweep_csv(std::span<const SweepRow> rows);

} // namespace cpd
