#include "cpdbench/eval.hpp"

#include <cmath>
#include <stdexcept>

#include "cpdbench/bayesian.hpp"
#include "cpdbench/detector.hpp"
#include "cpdbench/parallel.hpp"
#include "cpdbench/synth.hpp"

namespace cpd {
namespace {

void require_truth(std::span<const RRSeries> corpus) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  for (const auto& s : corpus) {
    if (!s.has_truth()) throw std::invalid_argument("ground truth required");
  }
}

std::string csv_quote(const std::string& field) {
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void append_summary(std::string& out, const EvalSummary& s, bool with_f1) {
  const MeanStd* fields[] = {&s.f1, &s.tpr, &s.ppv, &s.fp_per_hour};
  for (const MeanStd* m : std::span(fields).subspan(with_f1 ? 0 : 1)) {
    out += ',' + format_double(m->mean) + ',' + format_double(m->std);
  }
}

ChangepointResult threshold_posterior(std::span<const double> posterior, const DetectorConfig& config) {
  ChangepointResult result;
  result.detector = config;
  const double cutoff = std::get<BcpConfig>(config.params).cutoff;
  for (std::size_t i = 1; i < posterior.size(); ++i) {
    if (posterior[i] > cutoff) {
      result.indices.push_back(i);
      result.scores.push_back(posterior[i]);
    }
  }
  return result;
}

} // namespace

MatchCounts match_changepoints(std::span<const std::size_t> truth,
                               std::span<const std::size_t> estimated, std::size_t tolerance) {
  MatchCounts c;
  std::size_t j = 0;
  for (std::size_t t : truth) {
    // Estimates left of the window can no longer match any later truth.
    while (j < estimated.size() && estimated[j] + tolerance < t) ++j;
    if (j < estimated.size() && estimated[j] <= t + tolerance) {
      ++c.tp;
      ++j;
    }
  }
  c.fn = truth.size() - c.tp;
  c.fp = estimated.size() - c.tp;
  return c;
}

EvalReport make_report(const MatchCounts& c, double duration_hours) {
  EvalReport r;
  r.tp = c.tp;
  r.fp = c.fp;
  r.fn = c.fn;
  const double tp = static_cast<double>(c.tp);
  r.tpr = c.tp + c.fn == 0 ? 1.0 : tp / static_cast<double>(c.tp + c.fn);
  r.ppv = c.tp + c.fp == 0 ? 1.0 : tp / static_cast<double>(c.tp + c.fp);
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  r.f1 = denom == 0 ? 1.0 : 2.0 * tp / static_cast<double>(denom);
  r.fp_per_hour = duration_hours > 0.0 ? static_cast<double>(c.fp) / duration_hours : 0.0;
  return r;
}

EvalReport evaluate(const RRSeries& series, const ChangepointResult& result,
                    const MatchConfig& config) {
  if (!series.has_truth()) throw std::invalid_argument("ground truth required");
  check_changepoints(result.indices, series.size());
  return make_report(match_changepoints(series.truth(), result.indices, config.tolerance),
                     series.duration_hours());
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd m;
  if (values.empty()) return m;
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return m;
}

EvalSummary summarize(std::span<const EvalReport> reports) {
  EvalSummary s;
  s.series = reports.size();
  std::vector<double> tpr, ppv, f1, fph;
  for (const auto& r : reports) {
    tpr.push_back(r.tpr);
    ppv.push_back(r.ppv);
    f1.push_back(r.f1);
    fph.push_back(r.fp_per_hour);
  }
  s.tpr = mean_std(tpr);
  s.ppv = mean_std(ppv);
  s.f1 = mean_std(f1);
  s.fp_per_hour = mean_std(fph);
  return s;
}

GridSpec GridSpec::defaults() {
  GridSpec g;
  for (std::size_t l0 = 6; l0 <= 12; ++l0) g.rmdm_l0.push_back(l0);
  const PenaltyKind penalties[] = {PenaltyKind::aic, PenaltyKind::bic, PenaltyKind::hannan_quinn};
  for (CostKind c : {CostKind::mean, CostKind::mean_and_variance}) {
    for (PenaltyKind p : penalties) {
      g.binseg.emplace_back(c, p);
      g.pelt1.emplace_back(c, p);
    }
  }
  for (CostKind c : {CostKind::rms, CostKind::mean, CostKind::linear, CostKind::mean_and_variance}) {
    for (PenaltyKind p : penalties) g.pelt2.emplace_back(c, p);
  }
  g.bblocks_gamma = {1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0};
  for (int k = 0; k <= 10; ++k) {
    g.bcp_w0.push_back(k / 10.0);
    g.bcp_p0.push_back(k / 10.0);
  }
  for (int k = 5; k <= 10; ++k) g.bcp_cutoff.push_back(k / 10.0);
  for (int k = 1; k <= 20; ++k) g.bocd_lambda.push_back(100.0 * k);
  for (int k = 1; k <= 10; ++k) g.mbocd_lambda.push_back(10.0 * k);
  return g;
}

std::vector<DetectorConfig> GridSpec::candidates(Algorithm algo) const {
  std::vector<DetectorConfig> out;
  const DetectorConfig base = DetectorConfig::defaults(algo);
  auto with = [&](auto params) {
    DetectorConfig c = base;
    c.params = params;
    out.push_back(c);
  };
  auto cost_grid = [&](const std::vector<CostPenalty>& combos) {
    for (auto [cost, penalty] : combos) {
      auto p = std::get<CostPenaltyConfig>(base.params);
      p.cost = cost;
      p.penalty = penalty;
      with(p);
    }
  };
  switch (algo) {
    case Algorithm::rmdm:
      for (std::size_t l0 : rmdm_l0) {
        auto p = std::get<RmdmConfig>(base.params);
        p.l0 = l0;
        with(p);
      }
      break;
    case Algorithm::binseg: cost_grid(binseg); break;
    case Algorithm::pelt1: cost_grid(pelt1); break;
    case Algorithm::pelt2: cost_grid(pelt2); break;
    case Algorithm::bblocks:
      for (double g : bblocks_gamma) with(BBlocksConfig{g});
      break;
    case Algorithm::bcp:
      for (double w0 : bcp_w0) {
        for (double p0 : bcp_p0) {
          auto p = std::get<BcpConfig>(base.params);
          p.w0 = w0;
          p.p0 = p0;
          with(p);
        }
      }
      break;
    case Algorithm::bocd:
    case Algorithm::mbocd:
      for (double lambda : algo == Algorithm::bocd ? bocd_lambda : mbocd_lambda) {
        auto p = std::get<BocdConfig>(base.params);
        p.lambda = lambda;
        with(p);
      }
      break;
  }
  return out;
}

GridResult grid_search(Algorithm algo, const GridSpec& grid, std::span<const RRSeries> corpus,
                       const MatchConfig& match, std::size_t jobs) {
  require_truth(corpus);
  const auto configs = grid.candidates(algo);
  if (configs.empty()) throw std::invalid_argument("empty parameter grid");

  const std::size_t m = corpus.size();
  std::vector<EvalReport> reports(configs.size() * m);
  parallel_for(reports.size(), jobs, [&](std::size_t k) {
    const RRSeries& s = corpus[k % m];
    reports[k] = evaluate(s, detect(s, configs[k / m]), match);
  });

  GridResult out;
  double best_f1 = -1.0;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const auto summary = summarize(std::span(reports).subspan(c * m, m));
    out.table.push_back({1, configs[c], summary});
    if (summary.f1.mean > best_f1) {
      best_f1 = summary.f1.mean;
      out.best = configs[c];
    }
  }
  if (algo != Algorithm::bcp || grid.bcp_cutoff.empty()) return out;

  // Stage 2: the sampler output does not depend on the cutoff, so the
  // winner's posteriors are computed once and re-thresholded.
  std::vector<std::vector<double>> posteriors(m);
  const auto bcp = std::get<BcpConfig>(out.best.params);
  parallel_for(m, jobs, [&](std::size_t i) {
    posteriors[i] = bcp_posterior(corpus[i].intervals(), bcp);
  });
  const DetectorConfig stage1_best = out.best;
  best_f1 = -1.0;
  for (double cutoff : grid.bcp_cutoff) {
    DetectorConfig config = stage1_best;
    std::get<BcpConfig>(config.params).cutoff = cutoff;
    std::vector<EvalReport> rows(m);
    for (std::size_t i = 0; i < m; ++i) {
      rows[i] = evaluate(corpus[i], threshold_posterior(posteriors[i], config), match);
    }
    const auto summary = summarize(rows);
    out.table.push_back({2, config, summary});
    if (summary.f1.mean > best_f1) {
      best_f1 = summary.f1.mean;
      out.best = config;
    }
  }
  return out;
}

std::string grid_table_csv(const GridResult& result) {
  std::string out =
      "stage,params,f1_mean,f1_std,tpr_mean,tpr_std,ppv_mean,ppv_std,fp_per_hour_mean,"
      "fp_per_hour_std\n";
  for (const auto& row : result.table) {
    out += std::to_string(row.stage) + ',' + csv_quote(detector_params_to_json(row.config));
    append_summary(out, row.summary, true);
    out += '\n';
  }
  return out;
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::noise: return "noise";
    case SweepAxis::ectopy: return "ectopy";
    case SweepAxis::tolerance: return "tolerance";
  }
  return "?";
}

SweepAxis parse_sweep_axis(std::string_view id) {
  for (SweepAxis a : {SweepAxis::noise, SweepAxis::ectopy, SweepAxis::tolerance}) {
    if (to_string(a) == id) return a;
  }
  throw std::invalid_argument("unknown sweep axis '" + std::string(id) + "'");
}

std::vector<SweepRow> sweep(std::span<const DetectorConfig> detectors,
                            std::span<const RRSeries> corpus, SweepAxis axis,
                            std::span<const double> values, const MatchConfig& match,
                            std::uint64_t perturb_seed, std::size_t jobs) {
  require_truth(corpus);
  for (double v : values) {
    if (axis == SweepAxis::tolerance) {
      if (!(v >= 0.0) || v != std::floor(v)) {
        throw std::invalid_argument("tolerance values must be non-negative integers");
      }
    } else if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("probabilities must lie in [0, 1]");
    }
  }
  const std::size_t m = corpus.size();
  const std::size_t d = detectors.size();
  // grid[det][value][series]
  std::vector<EvalReport> grid(d * values.size() * m);
  auto slot = [&](std::size_t det, std::size_t v, std::size_t i) -> EvalReport& {
    return grid[(det * values.size() + v) * m + i];
  };

  if (axis == SweepAxis::tolerance) {
    parallel_for(d * m, jobs, [&](std::size_t k) {
      const RRSeries& s = corpus[k % m];
      const auto result = detect(s, detectors[k / m]);
      for (std::size_t v = 0; v < values.size(); ++v) {
        slot(k / m, v, k % m) =
            evaluate(s, result, MatchConfig{static_cast<std::size_t>(values[v])});
      }
    });
  } else {
    for (std::size_t v = 0; v < values.size(); ++v) {
      std::vector<RRSeries> perturbed(m);
      parallel_for(m, jobs, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(perturb_seed, i);
        perturbed[i] = axis == SweepAxis::noise ? inject_noise(corpus[i], values[v], seed)
                                                : inject_ectopy(corpus[i], values[v], seed);
      });
      parallel_for(d * m, jobs, [&](std::size_t k) {
        const RRSeries& s = perturbed[k % m];
        slot(k / m, v, k % m) = evaluate(s, detect(s, detectors[k / m]), match);
      });
    }
  }

  std::vector<SweepRow> rows;
  for (std::size_t det = 0; det < d; ++det) {
    for (std::size_t v = 0; v < values.size(); ++v) {
      rows.push_back({detectors[det].algo, values[v],
                      summarize(std::span(grid).subspan((det * values.size() + v) * m, m))});
    }
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string out =
      "algo,axis_value,tpr_mean,tpr_std,ppv_mean,ppv_std,fp_per_hour_mean,fp_per_hour_std\n";
  for (const auto& row : rows) {
    out += std::string(to_string(row.algo)) + ',' + format_double(row.axis_value);
    append_summary(out, row.summary, false);
    out += '\n';
  }
  return out;
}

} // namespace cpd
