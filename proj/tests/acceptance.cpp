// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "cpdbench/bayesian.hpp"
#include "cpdbench/classify.hpp"
#include "cpdbench/detector.hpp"
#include "cpdbench/eval.hpp"
#include "cpdbench/frequentist.hpp"
#include "cpdbench/parallel.hpp"
#include "cpdbench/synth.hpp"

using namespace cpd;

namespace {

// Tolerances and sizes, pinned.
constexpr double kOracleSeconds = 60.0;
constexpr double kBocdTol = 1e-6;
constexpr double kF1Tol = 1e-12;
constexpr double kZ95 = 1.959963984540054;  // two-sided 95%
constexpr std::size_t kBenchSeries = 400;
constexpr double kBenchHours = 7.0;
constexpr std::size_t kBenchTolerance = 3;
constexpr std::size_t kSweepSubset = 100;
constexpr double kAlphaLo = 1.45, kAlphaHi = 1.55;
constexpr double kMinLooAcc = 0.85;

int failures = 0;

void verdict(const char* id, bool pass, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void note(const std::string& s) {
  std::printf("  %s\n", s.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// --- 1-3: oracle equivalence ---------------------------------------------------------

void pelt_oracle() {
  Timer timer;
  oracle::Gen gen(1001);
  std::size_t mismatches = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto x = gen.steps(gen.index(4, 200), 1.0, gen.uniform(0.5, 4.0));
    CostPenaltyConfig c;
    c.cost = static_cast<CostKind>(gen.index(0, 3));
    c.penalty = static_cast<PenaltyKind>(gen.index(0, 3));
    c.beta = gen.uniform(0.5, 10.0);
    if (pelt_detect(x, c).indices != oracle::optimal_partition(x, c)) ++mismatches;
  }
  const double s = timer.seconds();
  verdict("1 pelt-oracle", mismatches == 0 && s < kOracleSeconds,
          fmt("200 series, %zu mismatches, %.1f s", mismatches, s));
}

void bblocks_oracle() {
  Timer timer;
  oracle::Gen gen(1002);
  std::size_t mismatches = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = gen.steps(gen.index(2, 15), 1.0, gen.uniform(1.0, 5.0));
    const double gamma = gen.uniform(0.1, 6.0);
    if (bblocks_detect(x, BBlocksConfig{gamma}).indices != oracle::bblocks_brute_force(x, gamma)) ++mismatches;
  }
  const double s = timer.seconds();
  verdict("2 bblocks-oracle", mismatches == 0 && s < kOracleSeconds,
          fmt("100 series, %zu mismatches, %.1f s", mismatches, s));
}

void bocd_oracle() {
  oracle::Gen gen(1003);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> x(gen.index(1, 10));
    for (double& v : x) v = gen.normal() + (gen.coin() ? 2.0 : 0.0);
    BocdConfig c;
    c.lambda = gen.uniform(1.5, 100.0);
    c.mu0 = gen.uniform(-1.0, 1.0);
    c.nu0 = gen.uniform(0.5, 2.0);
    c.alpha0 = gen.uniform(0.5, 3.0);
    c.beta0 = gen.uniform(0.5, 3.0);
    const auto got = bocd_posterior(x, c).probs;
    const auto want = oracle::bocd_enumeration(x, c);
    for (std::size_t t = 0; t < x.size(); ++t) {
      for (std::size_t r = 0; r <= t + 1; ++r) {
        const double g = r < got[t].size() ? got[t][r] : 0.0;
        worst = std::max(worst, std::abs(g - want[t][r]));
      }
    }
  }
  verdict("3 bocd-oracle", worst <= kBocdTol, fmt("50 cases, max |diff| %.3g (tol %.0e)", worst, kBocdTol));
}

// --- 4: mBOCD structure ------------------------------------------------------------------

void mbocd_structure() {
  const BocdConfig mcfg = std::get<BocdConfig>(DetectorConfig::defaults(Algorithm::mbocd).params);
  const BocdConfig bcfg = std::get<BocdConfig>(DetectorConfig::defaults(Algorithm::bocd).params);
  oracle::Gen gen(1004);
  std::size_t violations = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = gen.steps(gen.index(2, 800), 1.0, gen.uniform(0.0, 5.0));
    const auto r = mbocd_run_lengths(x, mcfg);
    for (std::size_t t = 1; t < r.size(); ++t) {
      if (r[t] != 0 && r[t] != r[t - 1] + 1) ++violations;
    }
  }
  // Multi-step artificial series: alternating levels, 100 beats each.
  std::vector<double> x;
  std::vector<std::size_t> steps;
  for (int k = 0; k < 5; ++k) {
    if (k > 0) steps.push_back(x.size());
    for (int i = 0; i < 100; ++i) x.push_back((k % 2 ? 4.0 : 0.0) + 0.5 * gen.normal());
  }
  const auto r = mbocd_run_lengths(x, mcfg);
  std::size_t missed = 0;
  for (std::size_t s : steps) {
    bool reset = false;
    for (std::size_t t = s; t <= s + kBenchTolerance; ++t) reset = reset || r[t] == 0;
    missed += !reset;
  }
  std::size_t zeros = 0;
  for (std::size_t v : bocd_map_trace(x, bcfg)) zeros += v == 0;
  verdict("4 mbocd-structure", violations == 0 && missed == 0 && zeros == 0,
          fmt("%zu run-length violations over 100 series; %zu/%zu steps without an mBOCD reset; "
              "BOCD MAP zeros %zu",
              violations, missed, steps.size(), zeros));
}

// --- 5: matching identities ---------------------------------------------------------------

void metric_identities() {
  oracle::Gen gen(1005);
  std::size_t bad = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const std::size_t n = gen.index(2, 1000);
    const auto truth = gen.sorted_subset(1, n - 1, gen.uniform(0.0, 0.2));
    const auto est = gen.sorted_subset(1, n - 1, gen.uniform(0.0, 0.2));
    const std::size_t tol = gen.index(0, 10);
    const auto m = match_changepoints(truth, est, tol);
    const auto r = make_report(m, 1.0);
    bool ok = m.tp + m.fn == truth.size() && m.tp + m.fp == est.size();
    if (m.tp > 0) ok = ok && std::abs(r.f1 - 2.0 * r.tpr * r.ppv / (r.tpr + r.ppv)) <= kF1Tol;
    ok = ok && match_changepoints(truth, est, tol + 1).tp >= m.tp;
    bad += !ok;
  }
  verdict("5 metric-identities", bad == 0, fmt("10000 instances, %zu violations", bad));
}

// --- 6: benchmark ordering ------------------------------------------------------------------

struct Bench {
  std::vector<RRSeries> corpus;
  std::vector<std::vector<ChangepointResult>> results;  // [algo][series]
  std::vector<std::vector<EvalReport>> reports;
};

// Paired comparison: is mean(a - b) not significantly below zero?
bool not_below(std::span<const double> a, std::span<const double> b, double* mean_out, double* half_out) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const auto ms = mean_std(d);
  const double half = kZ95 * ms.std / std::sqrt(static_cast<double>(d.size()));
  *mean_out = ms.mean;
  *half_out = half;
  return ms.mean + half >= 0.0;
}

std::vector<double> column(const std::vector<EvalReport>& reps, double EvalReport::*field) {
  std::vector<double> out;
  for (const auto& r : reps) out.push_back(r.*field);
  return out;
}

Bench run_benchmark() {
  Bench b;
  Timer timer;
  b.corpus.resize(kBenchSeries);
  parallel_for(kBenchSeries, jobs(), [&](std::size_t i) {
    SynthConfig c;
    c.duration_hours = kBenchHours;
    c.seed = i;
    b.corpus[i] = generate(c);
  });
  const std::size_t n_algo = std::size(kAllAlgorithms);
  b.results.assign(n_algo, std::vector<ChangepointResult>(kBenchSeries));
  b.reports.assign(n_algo, std::vector<EvalReport>(kBenchSeries));
  parallel_for(n_algo * kBenchSeries, jobs(), [&](std::size_t k) {
    const std::size_t a = k / kBenchSeries, i = k % kBenchSeries;
    b.results[a][i] = detect(b.corpus[i], DetectorConfig::defaults(kAllAlgorithms[a]));
    b.reports[a][i] = evaluate(b.corpus[i], b.results[a][i], MatchConfig{kBenchTolerance});
  });
  note(fmt("benchmark: %zu series x %.0f h, %zu detectors, %.0f s", kBenchSeries, kBenchHours, n_algo,
           timer.seconds()));
  for (std::size_t a = 0; a < n_algo; ++a) {
    const auto s = summarize(b.reports[a]);
    note(fmt("%-8s TPR %.3f +- %.3f  PPV %.3f +- %.3f  F1 %.3f  FP/h %.1f +- %.1f",
             std::string(to_string(kAllAlgorithms[a])).c_str(), s.tpr.mean, s.tpr.std, s.ppv.mean, s.ppv.std,
             s.f1.mean, s.fp_per_hour.mean, s.fp_per_hour.std));
  }
  return b;
}

std::size_t algo_index(Algorithm a) {
  for (std::size_t i = 0; i < std::size(kAllAlgorithms); ++i) {
    if (kAllAlgorithms[i] == a) return i;
  }
  return 0;
}

void benchmark_ordering(const Bench& b) {
  const std::size_t n_algo = std::size(kAllAlgorithms);
  const std::size_t rmdm = algo_index(Algorithm::rmdm), mbocd = algo_index(Algorithm::mbocd),
                    bocd = algo_index(Algorithm::bocd);
  double m = 0, h = 0;

  bool ok = true;
  std::string detail;
  const auto tpr_r = column(b.reports[rmdm], &EvalReport::tpr);
  for (std::size_t a = 0; a < n_algo; ++a) {
    if (a == rmdm) continue;
    const bool pass = not_below(tpr_r, column(b.reports[a], &EvalReport::tpr), &m, &h);
    if (!pass) detail += fmt(" below %s by %.3f+-%.3f;", std::string(to_string(kAllAlgorithms[a])).c_str(), -m, h);
    ok = ok && pass;
  }
  verdict("6a rmdm-highest-tpr", ok, detail.empty() ? "RMDM TPR highest or tied at 95%" : detail);

  ok = true;
  detail.clear();
  const auto ppv_m = column(b.reports[mbocd], &EvalReport::ppv);
  const auto fph_m = column(b.reports[mbocd], &EvalReport::fp_per_hour);
  for (std::size_t a = 0; a < n_algo; ++a) {
    if (a == mbocd) continue;
    const std::string name(to_string(kAllAlgorithms[a]));
    if (!not_below(ppv_m, column(b.reports[a], &EvalReport::ppv), &m, &h)) {
      ok = false;
      detail += fmt(" PPV below %s by %.3f+-%.3f;", name.c_str(), -m, h);
    }
    if (!not_below(column(b.reports[a], &EvalReport::fp_per_hour), fph_m, &m, &h)) {
      ok = false;
      detail += fmt(" FP/h above %s by %.2f+-%.2f;", name.c_str(), -m, h);
    }
  }
  verdict("6b mbocd-highest-ppv-lowest-fph", ok,
          detail.empty() ? "mBOCD PPV highest and FP/h lowest, or tied at 95%" : detail);

  ok = true;
  detail.clear();
  const auto ppv_b = column(b.reports[bocd], &EvalReport::ppv);
  for (std::size_t a = 0; a < n_algo; ++a) {
    if (a == bocd) continue;
    if (!not_below(column(b.reports[a], &EvalReport::ppv), ppv_b, &m, &h)) {
      ok = false;
      detail += fmt(" %s PPV below BOCD by %.3f+-%.3f;", std::string(to_string(kAllAlgorithms[a])).c_str(), -m, h);
    }
  }
  verdict("6c bocd-lowest-ppv", ok, detail.empty() ? "BOCD PPV lowest or tied at 95%" : detail);
}

// --- 7: sweeps -----------------------------------------------------------------------------

void sweep_behaviour(const Bench& b) {
  const std::size_t n_algo = std::size(kAllAlgorithms);
  bool mono = true;
  for (std::size_t a = 0; a < n_algo; ++a) {
    double prev = -1.0;
    std::string row;
    for (std::size_t tol : {1, 3, 5, 7}) {
      std::vector<EvalReport> reps;
      for (std::size_t i = 0; i < kBenchSeries; ++i) {
        reps.push_back(evaluate(b.corpus[i], b.results[a][i], MatchConfig{tol}));
      }
      const double tpr = summarize(reps).tpr.mean;
      mono = mono && tpr >= prev;
      prev = tpr;
      row += fmt(" %.3f", tpr);
    }
    note(fmt("%-8s TPR over tolerance 1,3,5,7:%s", std::string(to_string(kAllAlgorithms[a])).c_str(), row.c_str()));
  }
  verdict("7a tpr-monotone-in-tolerance", mono, fmt("%zu detectors x %zu series", n_algo, kBenchSeries));

  const std::span<const RRSeries> subset(b.corpus.data(), kSweepSubset);
  const std::vector<DetectorConfig> dets{DetectorConfig::defaults(Algorithm::mbocd)};
  const std::vector<double> noise{0.0, 0.005, 0.01, 0.015};
  const auto rows = sweep(dets, subset, SweepAxis::noise, noise, MatchConfig{kBenchTolerance}, 77, jobs());
  bool falling = true;
  std::string row;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    row += fmt(" %.3f", rows[i].summary.ppv.mean);
    if (i > 0) falling = falling && rows[i].summary.ppv.mean < rows[i - 1].summary.ppv.mean;
  }
  verdict("7b mbocd-ppv-falls-with-noise", falling,
          fmt("PPV over noise 0,.005,.01,.015 on %zu series:%s", kSweepSubset, row.c_str()));
}

// --- 8: Pareto recovery -------------------------------------------------------------------

void pareto_recovery() {
  std::size_t inside = 0;
  std::string vals;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    oracle::Gen gen(5000 + seed);
    std::vector<double> x(10000);
    for (double& v : x) v = 2.0 * std::pow(1.0 - gen.uniform(), -1.0 / 1.5);
    const double a = fit_pareto(x).shape;
    inside += a >= kAlphaLo && a <= kAlphaHi;
    vals += fmt(" %.3f", a);
  }
  verdict("8 pareto-recovery", inside >= 19, fmt("%zu/20 in [%.2f, %.2f];%s", inside, kAlphaLo, kAlphaHi, vals.c_str()));
}

// --- 9: classification ---------------------------------------------------------------------

std::vector<RRSeries> two_populations() {
  std::vector<RRSeries> subjects(40);
  parallel_for(40, jobs(), [&](std::size_t i) {
    SynthConfig c;
    c.duration_hours = kBenchHours;
    c.seed = derive_seed(9000, i);
    const bool pos = i < 20;
    c.dwell_shape = pos ? 1.2 : 2.0;
    c.label = pos ? std::string(kPositiveLabel) : "control";
    subjects[i] = generate(c).with_meta(fmt("subject_%02zu", i), *c.label);
  });
  return subjects;
}

void classification() {
  Timer timer;
  const auto subjects = two_populations();
  const auto r = end_to_end(subjects, DetectorConfig::defaults(Algorithm::rmdm), KnnConfig{}, CvConfig{}, jobs());
  const double s = timer.seconds();
  verdict("9 rmdm-loo-classification", r.acc >= kMinLooAcc && s < 600.0,
          fmt("LOO acc %.3f (AUROC %.3f, TPR %.3f), %zu excluded, %.0f s", r.acc, r.auroc, r.tpr, r.excluded, s));
}

// --- 10: determinism -------------------------------------------------------------------------

void determinism(const Bench& b) {
  bool same = true;
  std::string where;
  auto check = [&](bool ok, const char* stage) {
    if (!ok) where += std::string(" ") + stage;
    same = same && ok;
  };

  for (std::size_t i = 0; i < 3; ++i) {
    SynthConfig c;
    c.duration_hours = kBenchHours;
    c.seed = i;
    check(format_rr_csv(generate(c)) == format_rr_csv(b.corpus[i]), "generate");
  }
  const auto e1 = inject_ectopy(b.corpus[0], 0.01, 3), e2 = inject_ectopy(b.corpus[0], 0.01, 3);
  check(format_rr_csv(e1) == format_rr_csv(e2), "ectopy");
  const auto n1 = inject_noise(b.corpus[0], 0.01, 3), n2 = inject_noise(b.corpus[0], 0.01, 3);
  check(format_rr_csv(n1) == format_rr_csv(n2), "noise");

  for (std::size_t a = 0; a < std::size(kAllAlgorithms); ++a) {
    const auto again = detect(b.corpus[1], DetectorConfig::defaults(kAllAlgorithms[a]));
    check(result_to_json(again) == result_to_json(b.results[a][1]), "detect");
  }

  std::vector<RRSeries> small;
  for (std::size_t i = 0; i < 3; ++i) {
    SynthConfig c;
    c.duration_hours = 0.5;
    c.seed = 300 + i;
    small.push_back(generate(c));
  }
  GridSpec g = GridSpec::defaults();
  check(grid_table_csv(grid_search(Algorithm::pelt1, g, small, MatchConfig{3}, 1)) ==
            grid_table_csv(grid_search(Algorithm::pelt1, g, small, MatchConfig{3}, jobs() + 1)),
        "tune");
  const std::vector<DetectorConfig> dets{DetectorConfig::defaults(Algorithm::rmdm),
                                         DetectorConfig::defaults(Algorithm::mbocd)};
  const std::vector<double> ect{0.0, 0.01};
  check(sweep_csv(sweep(dets, small, SweepAxis::ectopy, ect, MatchConfig{3}, 5, 1)) ==
            sweep_csv(sweep(dets, small, SweepAxis::ectopy, ect, MatchConfig{3}, 5, jobs() + 1)),
        "sweep");

  std::vector<RRSeries> subjects;
  for (std::size_t i = 0; i < 10; ++i) {
    SynthConfig c;
    c.duration_hours = 0.5;
    c.seed = 400 + i;
    c.dwell_shape = i % 2 ? 1.2 : 2.0;
    subjects.push_back(generate(c).with_meta(fmt("s%zu", i), i % 2 ? "RBD" : "control"));
  }
  const CvConfig cv{CvConfig::Kind::kfold, 5, 11};
  check(report_to_json(end_to_end(subjects, dets[0], std::nullopt, cv, 1)) ==
            report_to_json(end_to_end(subjects, dets[0], std::nullopt, cv, jobs() + 1)),
        "classify");
  verdict("10 determinism", same,
          same ? "generate, perturb, detect, tune, sweep, classify byte-identical on re-run"
               : "differs at:" + where);
}

} // namespace

int main() {
  Timer total;
  pelt_oracle();
  bblocks_oracle();
  bocd_oracle();
  mbocd_structure();
  metric_identities();
  pareto_recovery();
  classification();
  const Bench bench = run_benchmark();
  benchmark_ordering(bench);
  sweep_behaviour(bench);
  determinism(bench);
  note(fmt("total %.0f s, %d failing", total.seconds(), failures));
  return failures == 0 ? 0 : 1;
}
