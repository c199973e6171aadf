#include "cpdbench/classify.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "cpdbench/detector.hpp"
#include "cpdbench/parallel.hpp"
#include "json.hpp"

namespace cpd {
namespace {

using nlohmann::json;

bool is_positive(const ParetoFeatures& f) {
  if (!f.label) throw std::invalid_argument("subject '" + f.subject_id + "' has no label");
  return *f.label == kPositiveLabel;
}

struct Scaler {
  double mean[2] = {0.0, 0.0};
  double inv_std[2] = {1.0, 1.0};

  void apply(const ParetoFeatures& f, double out[2]) const {
    out[0] = (f.scale - mean[0]) * inv_std[0];
    out[1] = (f.shape - mean[1]) * inv_std[1];
  }
};

Scaler fit_scaler(std::span<const ParetoFeatures> features, std::span<const std::size_t> train) {
  Scaler s;
  const double n = static_cast<double>(train.size());
  double sum[2] = {0.0, 0.0};
  for (std::size_t i : train) {
    sum[0] += features[i].scale;
    sum[1] += features[i].shape;
  }
  s.mean[0] = sum[0] / n;
  s.mean[1] = sum[1] / n;
  double ss[2] = {0.0, 0.0};
  for (std::size_t i : train) {
    ss[0] += (features[i].scale - s.mean[0]) * (features[i].scale - s.mean[0]);
    ss[1] += (features[i].shape - s.mean[1]) * (features[i].shape - s.mean[1]);
  }
  for (int d = 0; d < 2; ++d) {
    const double sd = std::sqrt(ss[d] / n);
    s.inv_std[d] = sd > 0.0 ? 1.0 / sd : 1.0;
  }
  return s;
}

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Sorted by descending score; returns (tp, fp) after each distinct score.
std::vector<std::pair<std::size_t, std::size_t>> threshold_steps(std::span<const double> scores,
                                                                 const std::vector<bool>& positive) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::pair<std::size_t, std::size_t>> steps;
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (positive[order[k]]) ++tp;
    else ++fp;
    if (k + 1 == order.size() || scores[order[k + 1]] != scores[order[k]]) {
      steps.emplace_back(tp, fp);
    }
  }
  return steps;
}

void check_scores(std::span<const double> scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
}

} // namespace

ParetoFeatures fit_pareto(std::span<const double> lengths) {
  if (lengths.size() < 2) throw std::invalid_argument("pareto fit needs at least 2 lengths");
  double xm = lengths[0];
  for (double l : lengths) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw std::invalid_argument("pareto fit needs positive finite lengths");
    }
    xm = std::min(xm, l);
  }
  double sum_log = 0.0;
  for (double l : lengths) sum_log += std::log(l / xm);
  if (!(sum_log > 0.0)) throw std::invalid_argument("degenerate sample");
  ParetoFeatures f;
  f.scale = xm;
  f.shape = static_cast<double>(lengths.size()) / sum_log;
  return f;
}

std::string_view to_string(DistanceMetric metric) {
  switch (metric) {
    case DistanceMetric::euclidean: return "euclidean";
    case DistanceMetric::manhattan: return "manhattan";
    case DistanceMetric::chebyshev: return "chebyshev";
    case DistanceMetric::minkowski: return "minkowski";
  }
  return "?";
}

DistanceMetric parse_metric(std::string_view id) {
  for (DistanceMetric m : kAllMetrics) {
    if (to_string(m) == id) return m;
  }
  throw std::invalid_argument("unknown distance metric '" + std::string(id) + "'");
}

void KnnConfig::validate() const {
  if (k < 1) throw std::invalid_argument("knn: k must be at least 1");
  if (metric == DistanceMetric::minkowski && !(minkowski_p >= 1.0 && std::isfinite(minkowski_p))) {
    throw std::invalid_argument("knn: minkowski p must be finite and >= 1");
  }
}

double distance(std::span<const double> a, std::span<const double> b, const KnnConfig& config) {
  if (a.size() != b.size()) throw std::invalid_argument("distance: dimension mismatch");
  double acc = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = std::abs(a[d] - b[d]);
    switch (config.metric) {
      case DistanceMetric::euclidean: acc += diff * diff; break;
      case DistanceMetric::manhattan: acc += diff; break;
      case DistanceMetric::chebyshev: acc = std::max(acc, diff); break;
      case DistanceMetric::minkowski: acc += std::pow(diff, config.minkowski_p); break;
    }
  }
  switch (config.metric) {
    case DistanceMetric::euclidean: return std::sqrt(acc);
    case DistanceMetric::minkowski: return std::pow(acc, 1.0 / config.minkowski_p);
    default: return acc;
  }
}

CvConfig parse_cv(std::string_view id) {
  CvConfig cv;
  if (id == "loo") return cv;
  constexpr std::string_view prefix = "kfold:";
  if (id.substr(0, prefix.size()) == prefix) {
    const auto rest = id.substr(prefix.size());
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), k);
    if (ec == std::errc{} && ptr == rest.data() + rest.size() && k >= 2) {
      cv.kind = CvConfig::Kind::kfold;
      cv.folds = k;
      return cv;
    }
  }
  throw std::invalid_argument("cv must be 'loo' or 'kfold:<k>' with k >= 2");
}

std::string to_string(const CvConfig& cv) {
  return cv.kind == CvConfig::Kind::loo ? "loo" : "kfold:" + std::to_string(cv.folds);
}

std::vector<std::size_t> make_folds(const std::vector<bool>& positive, const CvConfig& cv) {
  const std::size_t n = positive.size();
  std::vector<std::size_t> fold(n);
  if (cv.kind == CvConfig::Kind::loo) {
    std::iota(fold.begin(), fold.end(), 0);
    return fold;
  }
  if (cv.folds < 2 || cv.folds > n) {
    throw std::invalid_argument("kfold: need 2 <= k <= number of subjects");
  }
  std::mt19937_64 rng(cv.seed);
  std::size_t next = 0;
  for (bool cls : {true, false}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (positive[i] == cls) members.push_back(i);
    }
    // Fisher-Yates with explicit draws so the folds do not depend on the
    // standard library's shuffle.
    for (std::size_t i = members.size(); i > 1; --i) {
      const std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
      std::swap(members[i - 1], members[j]);
    }
    for (std::size_t i : members) fold[i] = next++ % cv.folds;
  }
  return fold;
}

double auroc(std::span<const double> scores, const std::vector<bool>& positive) {
  check_scores(scores, positive);
  const auto n_pos = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  const double n_neg = static_cast<double>(positive.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) return 0.5;
  double area = 0.0;
  double prev_tpr = 0.0, prev_fpr = 0.0;
  for (auto [tp, fp] : threshold_steps(scores, positive)) {
    const double tpr = static_cast<double>(tp) / n_pos;
    const double fpr = static_cast<double>(fp) / n_neg;
    area += (fpr - prev_fpr) * 0.5 * (tpr + prev_tpr);
    prev_tpr = tpr;
    prev_fpr = fpr;
  }
  return area;
}

double aucpr(std::span<const double> scores, const std::vector<bool>& positive) {
  check_scores(scores, positive);
  const auto n_pos = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  if (n_pos == 0.0) return 0.0;
  const auto steps = threshold_steps(scores, positive);
  double area = 0.0;
  double prev_recall = 0.0;
  double prev_precision = steps.empty() ? 1.0
                                        : static_cast<double>(steps[0].first) /
                                              static_cast<double>(steps[0].first + steps[0].second);
  for (auto [tp, fp] : steps) {
    const double recall = static_cast<double>(tp) / n_pos;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += (recall - prev_recall) * 0.5 * (precision + prev_precision);
    prev_recall = recall;
    prev_precision = precision;
  }
  return area;
}

ClassifierReport knn_classify(std::span<const ParetoFeatures> features, const KnnConfig& knn,
                              std::span<const std::size_t> folds) {
  knn.validate();
  const std::size_t n = features.size();
  if (folds.size() != n) throw std::invalid_argument("folds must assign every subject");
  std::vector<bool> positive(n);
  for (std::size_t i = 0; i < n; ++i) positive[i] = is_positive(features[i]);
  const auto n_pos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), true));
  if (n_pos == 0 || n_pos == n) throw std::invalid_argument("need at least two classes");

  ClassifierReport report;
  report.knn = knn;
  report.features.assign(features.begin(), features.end());
  report.folds.assign(folds.begin(), folds.end());
  report.scores.assign(n, 0.0);
  report.predictions.assign(n, false);
  for (const auto& f : features) {
    report.subject_ids.push_back(f.subject_id);
    report.labels.push_back(f.label);
  }

  std::vector<std::size_t> fold_ids(folds.begin(), folds.end());
  std::sort(fold_ids.begin(), fold_ids.end());
  fold_ids.erase(std::unique(fold_ids.begin(), fold_ids.end()), fold_ids.end());

  for (std::size_t fold : fold_ids) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (folds[i] == fold ? test : train).push_back(i);
    bool has_pos = false, has_neg = false;
    for (std::size_t i : train) (positive[i] ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) {
      throw std::invalid_argument("fold " + std::to_string(fold) + ": single-class training set");
    }
    if (knn.k > train.size()) {
      throw std::invalid_argument("knn: k exceeds the training set of fold " + std::to_string(fold));
    }
    Scaler scaler;
    if (knn.standardize) scaler = fit_scaler(features, train);
    std::vector<double> train_x(2 * train.size());
    for (std::size_t j = 0; j < train.size(); ++j) scaler.apply(features[train[j]], &train_x[2 * j]);

    std::vector<std::pair<double, std::size_t>> dist(train.size());
    for (std::size_t i : test) {
      double x[2];
      scaler.apply(features[i], x);
      for (std::size_t j = 0; j < train.size(); ++j) {
        dist[j] = {distance(x, std::span<const double>(&train_x[2 * j], 2), knn), train[j]};
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(knn.k), dist.end());
      std::size_t votes = 0;
      for (std::size_t j = 0; j < knn.k; ++j) votes += positive[dist[j].second] ? 1 : 0;
      report.scores[i] = static_cast<double>(votes) / static_cast<double>(knn.k);
      report.predictions[i] = report.scores[i] > 0.5;
    }
  }

  Confusion c;
  for (std::size_t i = 0; i < n; ++i) {
    if (report.predictions[i]) (positive[i] ? c.tp : c.fp)++;
    else (positive[i] ? c.fn : c.tn)++;
  }
  const auto d = [](std::size_t x) { return static_cast<double>(x); };
  report.acc = d(c.tp + c.tn) / d(n);
  report.tpr = d(c.tp) / d(c.tp + c.fn);
  report.ppv = c.tp + c.fp == 0 ? 1.0 : d(c.tp) / d(c.tp + c.fp);
  report.f1 = d(2 * c.tp) / d(2 * c.tp + c.fp + c.fn);
  report.auroc = auroc(report.scores, positive);
  report.aucpr = aucpr(report.scores, positive);
  return report;
}

KnnConfig tune_knn(std::span<const ParetoFeatures> features, std::span<const std::size_t> ks,
                   std::span<const DistanceMetric> metrics, std::span<const std::size_t> folds,
                   bool standardize) {
  if (ks.empty() || metrics.empty()) throw std::invalid_argument("tune_knn: empty search space");
  if (folds.size() != features.size()) throw std::invalid_argument("folds must assign every subject");
  std::size_t min_train = features.size();
  for (std::size_t f : folds) {
    min_train = std::min<std::size_t>(
        min_train, features.size() - static_cast<std::size_t>(std::count(folds.begin(), folds.end(), f)));
  }
  std::vector<std::size_t> sorted_k(ks.begin(), ks.end());
  std::sort(sorted_k.begin(), sorted_k.end());

  std::optional<KnnConfig> best;
  double best_score = -1.0;
  for (std::size_t k : sorted_k) {
    if (k < 1 || k > min_train) continue;
    for (DistanceMetric m : metrics) {
      KnnConfig cand;
      cand.k = k;
      cand.metric = m;
      cand.standardize = standardize;
      const double score = knn_classify(features, cand, folds).aucpr;
      if (score > best_score) {
        best_score = score;
        best = cand;
      }
    }
  }
  if (!best) throw std::invalid_argument("tune_knn: every k exceeds the training set");
  return *best;
}

KnnConfig tune_knn(std::span<const ParetoFeatures> features, std::span<const std::size_t> folds) {
  std::vector<std::size_t> ks(15);
  std::iota(ks.begin(), ks.end(), 1);
  return tune_knn(features, ks, kAllMetrics, folds);
}

ClassifierReport end_to_end(std::span<const RRSeries> subjects, const DetectorConfig& detector,
                            const std::optional<KnnConfig>& knn, const CvConfig& cv,
                            std::size_t jobs) {
  detector.validate();
  const std::size_t n = subjects.size();
  std::vector<std::optional<ParetoFeatures>> fitted(n);
  std::vector<std::string> reasons(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    const RRSeries& s = subjects[i];
    const auto result = detect(s, detector);
    if (result.indices.size() < 3) {
      reasons[i] = "only " + std::to_string(result.indices.size()) + " changepoints";
      return;
    }
    const auto seg = segments_from_changepoints(s, result.indices);
    try {
      auto f = fit_pareto(seg.segment_lengths);
      f.subject_id = s.subject_id();
      f.label = s.label();
      fitted[i] = std::move(f);
    } catch (const std::invalid_argument& e) {
      reasons[i] = e.what();
    }
  });

  std::vector<ParetoFeatures> features;
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < n; ++i) {
    if (fitted[i]) features.push_back(std::move(*fitted[i]));
    else warnings.push_back("excluded subject '" + subjects[i].subject_id() + "': " + reasons[i]);
  }
  std::vector<bool> positive(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) positive[i] = is_positive(features[i]);
  const auto folds = make_folds(positive, cv);

  const KnnConfig chosen = knn ? *knn : tune_knn(features, folds);
  auto report = knn_classify(features, chosen, folds);
  report.cv = cv;
  report.detector = detector;
  report.excluded = n - features.size();
  report.warnings = std::move(warnings);
  return report;
}

std::string features_csv(std::span<const ParetoFeatures> features) {
  std::string out = "subject_id,label,scale,shape\n";
  for (const auto& f : features) {
    out += f.subject_id + ',' + f.label.value_or("") + ',' + format_double(f.scale) + ',' +
           format_double(f.shape) + '\n';
  }
  return out;
}

std::vector<ParetoFeatures> parse_features_csv(std::string_view text) {
  std::vector<ParetoFeatures> out;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    for (std::size_t start = 0;;) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (!header_seen) {
      if (fields.size() != 4 || fields[0] != "subject_id" || fields[1] != "label" ||
          fields[2] != "scale" || fields[3] != "shape") {
        throw ParseError(where + "expected header 'subject_id,label,scale,shape'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 4) throw ParseError(where + "wrong number of fields");
    ParetoFeatures f;
    f.subject_id = std::string(fields[0]);
    if (!fields[1].empty()) f.label = std::string(fields[1]);
    for (int k = 0; k < 2; ++k) {
      const auto field = fields[2 + k];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc{} || ptr != field.data() + field.size() || !(v > 0.0) || !std::isfinite(v)) {
        throw ParseError(where + "scale and shape must be positive numbers");
      }
      (k == 0 ? f.scale : f.shape) = v;
    }
    out.push_back(std::move(f));
  }
  if (!header_seen) throw ParseError("missing header");
  return out;
}

std::string report_to_json(const ClassifierReport& r) {
  json subjects = json::array();
  for (std::size_t i = 0; i < r.subject_ids.size(); ++i) {
    subjects.push_back({{"subject_id", r.subject_ids[i]},
                        {"label", r.labels[i] ? json(*r.labels[i]) : json(nullptr)},
                        {"scale", r.features[i].scale},
                        {"shape", r.features[i].shape},
                        {"fold", r.folds[i]},
                        {"score", r.scores[i]},
                        {"predicted_positive", static_cast<bool>(r.predictions[i])}});
  }
  json knn = {{"k", r.knn.k}, {"metric", to_string(r.knn.metric)}, {"standardize", r.knn.standardize}};
  if (r.knn.metric == DistanceMetric::minkowski) knn["p"] = r.knn.minkowski_p;
  json j = {{"schema_version", kSchemaVersion},
            {"acc", r.acc},
            {"auroc", r.auroc},
            {"aucpr", r.aucpr},
            {"tpr", r.tpr},
            {"ppv", r.ppv},
            {"f1", r.f1},
            {"positive_label", kPositiveLabel},
            {"cv", to_string(r.cv)},
            {"knn", knn},
            {"detector", r.detector ? json::parse(detector_config_to_json(*r.detector)) : json(nullptr)},
            {"excluded", r.excluded},
            {"warnings", r.warnings},
            {"subjects", subjects}};
  return j.dump(2) + '\n';
}

} // namespace cpd
