#include "cpdbench/cpdbench.h"

#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "cpdbench/classify.hpp"
#include "cpdbench/detector.hpp"
#include "cpdbench/eval.hpp"
#include "cpdbench/synth.hpp"
#include "json.hpp"

struct cpd_series {
  cpd::RRSeries value;
};

struct cpd_corpus {
  std::vector<cpd::RRSeries> items;
};

struct cpd_detector {
  cpd::DetectorConfig value;
};

struct cpd_result {
  cpd::ChangepointResult value;
};

namespace {

thread_local std::string g_last_error;

cpd_status fail(cpd_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs fn and turns any exception into a status code plus thread-local message.
template <class Fn>
cpd_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return CPD_OK;
  } catch (const cpd::ParseError& e) {
    return fail(CPD_ERR_PARSE, e.what());
  } catch (const cpd::IoError& e) {
    return fail(CPD_ERR_IO, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(CPD_ERR_PARSE, e.what());
  } catch (const std::domain_error& e) {
    return fail(CPD_ERR_DOMAIN, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(CPD_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CPD_ERR_NO_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return fail(CPD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CPD_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw std::invalid_argument(std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

cpd::KnnConfig parse_knn(const char* text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("knn config must be a JSON object");
  cpd::KnnConfig knn;
  for (const auto& [key, value] : j.items()) {
    if (key == "k") knn.k = value.get<std::size_t>();
    else if (key == "metric") knn.metric = cpd::parse_metric(value.get<std::string>());
    else if (key == "p") knn.minkowski_p = value.get<double>();
    else if (key == "standardize") knn.standardize = value.get<bool>();
    else throw std::invalid_argument("knn config: unknown key '" + key + "'");
  }
  knn.validate();
  return knn;
}

cpd::CvConfig parse_cv(const char* cv, std::uint64_t seed) {
  auto out = cpd::parse_cv(cv ? cv : "loo");
  out.seed = seed;
  return out;
}

} // namespace

extern "C" {

const char* cpd_version(void) { return "1.0.0"; }

const char* cpd_status_string(cpd_status status) {
  switch (status) {
    case CPD_OK: return "ok";
    case CPD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CPD_ERR_PARSE: return "parse error";
    case CPD_ERR_IO: return "i/o error";
    case CPD_ERR_DOMAIN: return "domain error";
    case CPD_ERR_NO_MEMORY: return "out of memory";
    case CPD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* cpd_last_error(void) { return g_last_error.c_str(); }

void cpd_string_free(char* s) { std::free(s); }

// --- series --------------------------------------------------------------------

cpd_status cpd_series_create(const double* intervals, size_t n, const size_t* truth,
                             size_t n_truth, const char* subject_id, const char* label,
                             cpd_series** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    if (n > 0) require(intervals, "intervals");
    if (n_truth > 0) require(truth, "truth");
    std::optional<std::vector<std::size_t>> t;
    if (truth) t.emplace(truth, truth + n_truth);
    std::optional<std::string> l;
    if (label) l = label;
    *out = new cpd_series{cpd::RRSeries(std::vector<double>(intervals, intervals + n), std::move(t),
                                        subject_id ? subject_id : "", std::move(l))};
  });
}

cpd_status cpd_series_read_csv(const char* path, cpd_series** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new cpd_series{cpd::read_rr_csv(path)};
  });
}

cpd_status cpd_series_write_csv(const cpd_series* series, const char* path) {
  return guarded([&] {
    require(series, "series");
    require(path, "path");
    cpd::write_rr_csv(series->value, path);
  });
}

cpd_status cpd_series_set_meta(cpd_series* series, const char* subject_id, const char* label) {
  return guarded([&] {
    require(series, "series");
    std::optional<std::string> l;
    if (label) l = label;
    series->value = series->value.with_meta(subject_id ? subject_id : "", std::move(l));
  });
}

size_t cpd_series_size(const cpd_series* series) { return series ? series->value.size() : 0; }

const double* cpd_series_intervals(const cpd_series* series) {
  return series ? series->value.intervals().data() : nullptr;
}

double cpd_series_duration_hours(const cpd_series* series) {
  return series ? series->value.duration_hours() : 0.0;
}

int cpd_series_has_truth(const cpd_series* series) {
  return series && series->value.has_truth() ? 1 : 0;
}

size_t cpd_series_truth_size(const cpd_series* series) {
  return series ? series->value.truth().size() : 0;
}

const size_t* cpd_series_truth(const cpd_series* series) {
  return series ? series->value.truth().data() : nullptr;
}

const char* cpd_series_subject_id(const cpd_series* series) {
  return series ? series->value.subject_id().c_str() : "";
}

const char* cpd_series_label(const cpd_series* series) {
  return series && series->value.label() ? series->value.label()->c_str() : nullptr;
}

void cpd_series_free(cpd_series* series) { delete series; }

cpd_status cpd_generate(const char* config_json, uint64_t seed, cpd_series** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    auto config = cpd::synth_config_from_json(config_json ? config_json : "{}");
    config.seed = seed;
    *out = new cpd_series{cpd::generate(config)};
  });
}

cpd_status cpd_synth_config_json(const char* config_json, char** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    *out = dup_string(cpd::synth_config_to_json(cpd::synth_config_from_json(config_json ? config_json : "{}")));
  });
}

// --- corpus --------------------------------------------------------------------

cpd_status cpd_corpus_create(cpd_corpus** out) {
  return guarded([&] {
    require(out, "out");
    *out = new cpd_corpus{};
  });
}

cpd_status cpd_corpus_add(cpd_corpus* corpus, const cpd_series* series) {
  return guarded([&] {
    require(corpus, "corpus");
    require(series, "series");
    corpus->items.push_back(series->value);
  });
}

size_t cpd_corpus_size(const cpd_corpus* corpus) { return corpus ? corpus->items.size() : 0; }

void cpd_corpus_free(cpd_corpus* corpus) { delete corpus; }

// --- detection -----------------------------------------------------------------

cpd_status cpd_detector_create(const char* algo, const char* params_json, cpd_detector** out) {
  return guarded([&] {
    require(algo, "algo");
    require(out, "out");
    *out = nullptr;
    const auto a = cpd::parse_algorithm(algo);
    *out = new cpd_detector{params_json ? cpd::parse_detector_config(a, params_json)
                                        : cpd::DetectorConfig::defaults(a)};
  });
}

cpd_status cpd_detector_create_json(const char* config_json, cpd_detector** out) {
  return guarded([&] {
    require(config_json, "config_json");
    require(out, "out");
    *out = nullptr;
    *out = new cpd_detector{cpd::detector_config_from_json(config_json)};
  });
}

cpd_status cpd_detector_to_json(const cpd_detector* detector, char** out) {
  return guarded([&] {
    require(detector, "detector");
    require(out, "out");
    *out = nullptr;
    *out = dup_string(cpd::detector_config_to_json(detector->value));
  });
}

void cpd_detector_free(cpd_detector* detector) { delete detector; }

cpd_status cpd_detect(const cpd_series* series, const cpd_detector* detector, cpd_result** out) {
  return guarded([&] {
    require(series, "series");
    require(detector, "detector");
    require(out, "out");
    *out = nullptr;
    *out = new cpd_result{cpd::detect(series->value, detector->value)};
  });
}

size_t cpd_result_size(const cpd_result* result) { return result ? result->value.indices.size() : 0; }

const size_t* cpd_result_indices(const cpd_result* result) {
  return result ? result->value.indices.data() : nullptr;
}

const double* cpd_result_scores(const cpd_result* result) {
  return result && result->value.has_scores() ? result->value.scores.data() : nullptr;
}

size_t cpd_result_warning_count(const cpd_result* result) {
  return result ? result->value.warnings.size() : 0;
}

const char* cpd_result_warning(const cpd_result* result, size_t i) {
  if (!result || i >= result->value.warnings.size()) return nullptr;
  return result->value.warnings[i].c_str();
}

cpd_status cpd_result_to_json(const cpd_result* result, char** out) {
  return guarded([&] {
    require(result, "result");
    require(out, "out");
    *out = nullptr;
    *out = dup_string(cpd::result_to_json(result->value));
  });
}

void cpd_result_free(cpd_result* result) { delete result; }

cpd_status cpd_segment_lengths(const cpd_series* series, const cpd_result* result, double* lengths,
                               size_t capacity, size_t* count) {
  return guarded([&] {
    require(series, "series");
    require(result, "result");
    require(count, "count");
    if (capacity > 0) require(lengths, "lengths");
    const auto seg = cpd::segments_from_changepoints(series->value, result->value.indices);
    *count = seg.segment_lengths.size();
    const std::size_t m = std::min(capacity, seg.segment_lengths.size());
    std::copy_n(seg.segment_lengths.begin(), m, lengths);
  });
}

// --- evaluation ----------------------------------------------------------------

cpd_status cpd_evaluate(const cpd_series* series, const cpd_result* result, size_t tolerance,
                        cpd_eval_report* out) {
  return guarded([&] {
    require(series, "series");
    require(result, "result");
    require(out, "out");
    const auto r = cpd::evaluate(series->value, result->value, cpd::MatchConfig{tolerance});
    *out = cpd_eval_report{r.tp, r.fp, r.fn, r.tpr, r.ppv, r.f1, r.fp_per_hour};
  });
}

cpd_status cpd_tune(const char* algo, const cpd_corpus* corpus, size_t tolerance, size_t jobs,
                    char** best_json, char** table_csv) {
  return guarded([&] {
    require(algo, "algo");
    require(corpus, "corpus");
    if (best_json) *best_json = nullptr;
    if (table_csv) *table_csv = nullptr;
    const auto result = cpd::grid_search(cpd::parse_algorithm(algo), cpd::GridSpec::defaults(),
                                         corpus->items, cpd::MatchConfig{tolerance}, jobs);
    std::string best = cpd::detector_config_to_json(result.best);
    std::string table = cpd::grid_table_csv(result);
    if (best_json) *best_json = dup_string(best);
    if (table_csv) {
      try {
        *table_csv = dup_string(table);
      } catch (...) {
        if (best_json) {
          cpd_string_free(*best_json);
          *best_json = nullptr;
        }
        throw;
      }
    }
  });
}

cpd_status cpd_sweep(const cpd_detector* const* detectors, size_t n_detectors,
                     const cpd_corpus* corpus, const char* axis, const double* values,
                     size_t n_values, size_t tolerance, uint64_t perturb_seed, size_t jobs,
                     char** csv) {
  return guarded([&] {
    require(corpus, "corpus");
    require(axis, "axis");
    require(csv, "csv");
    *csv = nullptr;
    if (n_detectors > 0) require(detectors, "detectors");
    if (n_values > 0) require(values, "values");
    std::vector<cpd::DetectorConfig> configs;
    for (size_t i = 0; i < n_detectors; ++i) {
      require(detectors[i], "detector");
      configs.push_back(detectors[i]->value);
    }
    const auto rows = cpd::sweep(configs, corpus->items, cpd::parse_sweep_axis(axis),
                                 std::span<const double>(values, n_values),
                                 cpd::MatchConfig{tolerance}, perturb_seed, jobs);
    *csv = dup_string(cpd::sweep_csv(rows));
  });
}

// --- classification ------------------------------------------------------------

cpd_status cpd_fit_pareto(const double* lengths, size_t n, double* scale, double* shape) {
  return guarded([&] {
    if (n > 0) require(lengths, "lengths");
    require(scale, "scale");
    require(shape, "shape");
    cpd::ParetoFeatures f;
    try {
      f = cpd::fit_pareto(std::span<const double>(lengths, n));
    } catch (const std::invalid_argument& e) {
      if (std::string_view(e.what()) == "degenerate sample") throw std::domain_error(e.what());
      throw;
    }
    *scale = f.scale;
    *shape = f.shape;
  });
}

cpd_status cpd_classify_features(const char* features_csv, const char* knn_json, const char* cv,
                                 uint64_t fold_seed, char** report_json) {
  return guarded([&] {
    require(features_csv, "features_csv");
    require(report_json, "report_json");
    *report_json = nullptr;
    const auto features = cpd::parse_features_csv(features_csv);
    const auto cv_config = parse_cv(cv, fold_seed);
    std::vector<bool> positive;
    for (const auto& f : features) {
      if (!f.label) throw std::invalid_argument("subject '" + f.subject_id + "' has no label");
      positive.push_back(*f.label == cpd::kPositiveLabel);
    }
    const auto folds = cpd::make_folds(positive, cv_config);
    const auto knn = knn_json ? parse_knn(knn_json) : cpd::tune_knn(features, folds);
    auto report = cpd::knn_classify(features, knn, folds);
    report.cv = cv_config;
    *report_json = dup_string(cpd::report_to_json(report));
  });
}

cpd_status cpd_classify_subjects(const cpd_corpus* subjects, const cpd_detector* detector,
                                 const char* knn_json, const char* cv, uint64_t fold_seed,
                                 size_t jobs, char** report_json) {
  return guarded([&] {
    require(subjects, "subjects");
    require(detector, "detector");
    require(report_json, "report_json");
    *report_json = nullptr;
    std::optional<cpd::KnnConfig> knn;
    if (knn_json) knn = parse_knn(knn_json);
    const auto report =
        cpd::end_to_end(subjects->items, detector->value, knn, parse_cv(cv, fold_seed), jobs);
    *report_json = dup_string(cpd::report_to_json(report));
  });
}

} // extern "C"
