#pragma once

// Subject-level features from segment durations (Pareto fit) and
// cross-validated KNN classification on those features.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpdbench/config.hpp"
#include "cpdbench/series.hpp"

namespace cpd {

inline constexpr std::string_view kPositiveLabel = "RBD";

struct ParetoFeatures {
  double scale = 0.0;  // x_m, seconds
  double shape = 0.0;  // alpha
  std::string subject_id;
  std::optional<std::string> label;
};

/// Classical MLE: x_m = min, alpha = n / sum ln(l_i / x_m).
/// Throws std::invalid_argument for fewer than 2 lengths, a non-positive
/// length, or identical lengths ("degenerate sample").
ParetoFeatures fit_pareto(std::span<const double> lengths);

enum class DistanceMetric { euclidean, manhattan, chebyshev, minkowski };

inline constexpr DistanceMetric kAllMetrics[] = {DistanceMetric::euclidean,
                                                 DistanceMetric::manhattan,
                                                 DistanceMetric::chebyshev,
                                                 DistanceMetric::minkowski};

std::string_view to_string(DistanceMetric metric);
DistanceMetric parse_metric(std::string_view id);

struct KnnConfig {
  std::size_t k = 5;
  DistanceMetric metric = DistanceMetric::euclidean;
  double minkowski_p = 3.0;
  bool standardize = true;
  void validate() const;
};

double distance(std::span<const double> a, std::span<const double> b, const KnnConfig& config);

// --- folds -------------------------------------------------------------------

struct CvConfig {
  enum class Kind { loo, kfold } kind = Kind::loo;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
};

/// "loo" or "kfold:<k>".
CvConfig parse_cv(std::string_view id);
std::string to_string(const CvConfig& cv);

/// Fold index per subject. Leave-one-out gives subject i fold i; k-fold
/// shuffles each class with the seed and deals it round-robin across folds,
/// so class proportions stay balanced.
std::vector<std::size_t> make_folds(const std::vector<bool>& positive, const CvConfig& cv);

// --- metrics -------------------------------------------------------------------

/// Area under the ROC curve with tied scores treated as one threshold step,
/// which equals the average over tied orderings. 0.5 when a class is absent.
double auroc(std::span<const double> scores, const std::vector<bool>& positive);

/// Trapezoidal area under the precision-recall curve over distinct score
/// thresholds, starting from (recall 0, precision at the top threshold).
double aucpr(std::span<const double> scores, const std::vector<bool>& positive);

// --- classification ------------------------------------------------------------

struct ClassifierReport {
  double acc = 0.0;
  double auroc = 0.0;
  double aucpr = 0.0;
  double tpr = 0.0;
  double ppv = 0.0;
  double f1 = 0.0;
  KnnConfig knn;
  CvConfig cv;
  std::vector<std::string> subject_ids;
  std::vector<std::optional<std::string>> labels;
  std::vector<ParetoFeatures> features;
  std::vector<std::size_t> folds;
  std::vector<double> scores;      // fraction of positive neighbours
  std::vector<bool> predictions;   // score > 0.5
  std::optional<DetectorConfig> detector;
  std::size_t excluded = 0;
  std::vector<std::string> warnings;
};

/// Scores every subject from the training part of its fold. Features are
/// (scale, shape); when standardize is set they are z-scored with the
/// training mean and population std. Neighbour ties go to the lower subject
/// index. Throws std::invalid_argument when a subject lacks a label, fewer
/// than two classes are present, a training set is single-class, or k
/// exceeds a training set.
ClassifierReport knn_classify(std::span<const ParetoFeatures> features, const KnnConfig& knn,
                              std::span<const std::size_t> folds);

/// Exhaustive search over ks x metrics maximizing cross-validated AUCPR.
/// Candidates whose k exceeds the smallest training set are skipped. Ties go
/// to the smaller k, then to the earlier metric.
KnnConfig tune_knn(std::span<const ParetoFeatures> features, std::span<const std::size_t> ks,
                   std::span<const DistanceMetric> metrics, std::span<const std::size_t> folds,
                   bool standardize = true);

/// k in 1..15, all four metrics.
KnnConfig tune_knn(std::span<const ParetoFeatures> features, std::span<const std::size_t> folds);

/// Detect, segment in seconds, fit Pareto, classify. Subjects with fewer than
/// 3 changepoints or a degenerate fit are excluded with a warning. Without a
/// KNN config the best one is tuned on the same folds.
ClassifierReport end_to_end(std::span<const RRSeries> subjects, const DetectorConfig& detector,
                            const std::optional<KnnConfig>& knn, const CvConfig& cv,
                            std::size_t jobs = 1);

/// Features CSV: `subject_id,label,scale,shape`.
std::string features_csv(std::span<const ParetoFeatures> features);
std::vector<ParetoFeatures> parse_features_csv(std::string_view text);

std::string report_to_json(const ClassifierReport& report);

} // namespace cpd
