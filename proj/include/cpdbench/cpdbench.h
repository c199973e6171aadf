#ifndef CPDBENCH_H
#define CPDBENCH_H

/* C interface to the changepoint benchmark library.
 *
 * Every function returns a cpd_status; on failure cpd_last_error() gives a
 * message for the calling thread. Handles are opaque and owned by the caller,
 * who releases them with the matching *_free function. Strings returned
 * through char** out-parameters are heap copies released with
 * cpd_string_free. Distinct handles may be used from different threads
 * concurrently; a single handle may be read concurrently but not mutated.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CPD_BUILDING_LIBRARY)
#    define CPD_API __declspec(dllexport)
#  else
#    define CPD_API __declspec(dllimport)
#  endif
#else
#  define CPD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cpd_status {
  CPD_OK = 0,
  CPD_ERR_INVALID_ARGUMENT = 1, /* bad config, bad value, null pointer */
  CPD_ERR_PARSE = 2,            /* malformed CSV or JSON */
  CPD_ERR_IO = 3,               /* file could not be read or written */
  CPD_ERR_DOMAIN = 4,           /* input outside the model's range, e.g. too short */
  CPD_ERR_NO_MEMORY = 5,
  CPD_ERR_INTERNAL = 6
} cpd_status;

typedef struct cpd_series cpd_series;
typedef struct cpd_corpus cpd_corpus;
typedef struct cpd_detector cpd_detector;
typedef struct cpd_result cpd_result;

typedef struct cpd_eval_report {
  size_t tp, fp, fn;
  double tpr, ppv, f1, fp_per_hour;
} cpd_eval_report;

CPD_API const char* cpd_version(void);
CPD_API const char* cpd_status_string(cpd_status status);
/* Message of the last failing call on this thread; "" when none. */
CPD_API const char* cpd_last_error(void);
CPD_API void cpd_string_free(char* s);

/* --- series ---------------------------------------------------------------- */

/* truth may be NULL (no annotation); n_truth = 0 with a non-NULL pointer means
 * an annotated series without changepoints. subject_id and label may be NULL. */
CPD_API cpd_status cpd_series_create(const double* intervals, size_t n, const size_t* truth,
                                     size_t n_truth, const char* subject_id, const char* label,
                                     cpd_series** out);
/* Subject id defaults to the file stem. */
CPD_API cpd_status cpd_series_read_csv(const char* path, cpd_series** out);
/* Atomic write (temporary file, then rename). */
CPD_API cpd_status cpd_series_write_csv(const cpd_series* series, const char* path);
CPD_API cpd_status cpd_series_set_meta(cpd_series* series, const char* subject_id, const char* label);
CPD_API size_t cpd_series_size(const cpd_series* series);
CPD_API const double* cpd_series_intervals(const cpd_series* series);
CPD_API double cpd_series_duration_hours(const cpd_series* series);
/* Returns 0 when the series carries no annotation. */
CPD_API int cpd_series_has_truth(const cpd_series* series);
CPD_API size_t cpd_series_truth_size(const cpd_series* series);
CPD_API const size_t* cpd_series_truth(const cpd_series* series);
CPD_API const char* cpd_series_subject_id(const cpd_series* series);
/* NULL when unlabeled. */
CPD_API const char* cpd_series_label(const cpd_series* series);
CPD_API void cpd_series_free(cpd_series* series);

/* Synthetic tachogram. config_json may be NULL or "{}" for the defaults; its
 * "seed" key is overridden by seed. */
CPD_API cpd_status cpd_generate(const char* config_json, uint64_t seed, cpd_series** out);
/* Full synthetic config (defaults applied) as JSON. */
CPD_API cpd_status cpd_synth_config_json(const char* config_json, char** out);

/* --- corpus ---------------------------------------------------------------- */

CPD_API cpd_status cpd_corpus_create(cpd_corpus** out);
/* Copies the series. */
CPD_API cpd_status cpd_corpus_add(cpd_corpus* corpus, const cpd_series* series);
CPD_API size_t cpd_corpus_size(const cpd_corpus* corpus);
CPD_API void cpd_corpus_free(cpd_corpus* corpus);

/* --- detection ------------------------------------------------------------- */

/* algo is one of rmdm, binseg, pelt1, pelt2, bblocks, bcp, bocd, mbocd.
 * params_json may be NULL for the defaults; given keys override them. */
CPD_API cpd_status cpd_detector_create(const char* algo, const char* params_json,
                                       cpd_detector** out);
/* {"algo": ..., "params": {...}} */
CPD_API cpd_status cpd_detector_create_json(const char* config_json, cpd_detector** out);
CPD_API cpd_status cpd_detector_to_json(const cpd_detector* detector, char** out);
CPD_API void cpd_detector_free(cpd_detector* detector);

CPD_API cpd_status cpd_detect(const cpd_series* series, const cpd_detector* detector,
                              cpd_result** out);
CPD_API size_t cpd_result_size(const cpd_result* result);
CPD_API const size_t* cpd_result_indices(const cpd_result* result);
/* NULL when the detector produces no scores. */
CPD_API const double* cpd_result_scores(const cpd_result* result);
CPD_API size_t cpd_result_warning_count(const cpd_result* result);
CPD_API const char* cpd_result_warning(const cpd_result* result, size_t i);
CPD_API cpd_status cpd_result_to_json(const cpd_result* result, char** out);
CPD_API void cpd_result_free(cpd_result* result);

/* Segment durations in seconds between the detected changepoints. Writes up
 * to capacity values and stores the segment count in *count. */
CPD_API cpd_status cpd_segment_lengths(const cpd_series* series, const cpd_result* result,
                                       double* lengths, size_t capacity, size_t* count);

/* --- evaluation ------------------------------------------------------------ */

CPD_API cpd_status cpd_evaluate(const cpd_series* series, const cpd_result* result,
                                size_t tolerance, cpd_eval_report* out);

/* Grid search with the published ranges, maximizing mean F1. best_json gets
 * the winning detector config, table_csv the full score table. Either output
 * may be NULL. */
CPD_API cpd_status cpd_tune(const char* algo, const cpd_corpus* corpus, size_t tolerance,
                            size_t jobs, char** best_json, char** table_csv);

/* axis is noise, ectopy or tolerance. For tolerance the values are beat
 * counts and `tolerance` is ignored. */
CPD_API cpd_status cpd_sweep(const cpd_detector* const* detectors, size_t n_detectors,
                             const cpd_corpus* corpus, const char* axis, const double* values,
                             size_t n_values, size_t tolerance, uint64_t perturb_seed,
                             size_t jobs, char** csv);

/* --- classification -------------------------------------------------------- */

/* Pareto MLE of segment durations; fails with CPD_ERR_DOMAIN on identical
 * lengths. */
CPD_API cpd_status cpd_fit_pareto(const double* lengths, size_t n, double* scale, double* shape);

/* cv is "loo" or "kfold:<k>"; knn_json ({"k", "metric", "p", "standardize"})
 * may be NULL to tune k and the metric by cross-validated AUCPR. The report
 * is JSON. */
CPD_API cpd_status cpd_classify_features(const char* features_csv, const char* knn_json,
                                         const char* cv, uint64_t fold_seed, char** report_json);
CPD_API cpd_status cpd_classify_subjects(const cpd_corpus* subjects, const cpd_detector* detector,
                                         const char* knn_json, const char* cv, uint64_t fold_seed,
                                         size_t jobs, char** report_json);

#ifdef __cplusplus
}
#endif

#endif
