#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "cpdbench/detector.hpp"
#include "cpdbench/eval.hpp"
#include "cpdbench/synth.hpp"

using namespace cpd;

namespace {

using Idx = std::vector<std::size_t>;

std::vector<RRSeries> small_corpus(std::size_t n, double hours = 0.25) {
  std::vector<RRSeries> out;
  for (std::size_t i = 0; i < n; ++i) {
    SynthConfig c;
    c.duration_hours = hours;
    c.seed = 100 + i;
    out.push_back(generate(c));
  }
  return out;
}

} // namespace

TEST_CASE("matching examples") {
  auto m = match_changepoints(Idx{100}, Idx{102}, 3);
  CHECK((m.tp == 1 && m.fp == 0 && m.fn == 0));
  m = match_changepoints(Idx{100}, Idx{98, 102}, 3);
  CHECK((m.tp == 1 && m.fp == 1 && m.fn == 0));
  m = match_changepoints(Idx{50, 60}, Idx{55}, 5);
  CHECK((m.tp == 1 && m.fp == 0 && m.fn == 1));
  CHECK(oracle::max_matching(Idx{50, 60}, Idx{55}, 5) == 1);
  m = match_changepoints(Idx{}, Idx{}, 3);
  CHECK((m.tp == 0 && m.fp == 0 && m.fn == 0));
}

TEST_CASE("greedy in-order matching reaches the maximum matching") {
  oracle::Gen gen(1);
  for (int rep = 0; rep < 3000; ++rep) {
    const std::size_t n = gen.index(2, 80);
    const auto truth = gen.sorted_subset(1, n - 1, gen.uniform(0.0, 0.3));
    const auto est = gen.sorted_subset(1, n - 1, gen.uniform(0.0, 0.3));
    const std::size_t tol = gen.index(0, 8);
    CHECK(match_changepoints(truth, est, tol).tp == oracle::max_matching(truth, est, tol));
  }
}

TEST_CASE("metric identities") {
  oracle::Gen gen(2);
  for (int rep = 0; rep < 2000; ++rep) {
    const std::size_t n = gen.index(2, 500);
    const auto truth = gen.sorted_subset(1, n - 1, gen.uniform(0.0, 0.2));
    const auto est = gen.sorted_subset(1, n - 1, gen.uniform(0.0, 0.2));
    const std::size_t tol = gen.index(0, 10);
    const auto m = match_changepoints(truth, est, tol);
    CHECK(m.tp + m.fn == truth.size());
    CHECK(m.tp + m.fp == est.size());
    const auto r = make_report(m, 1.5);
    const std::size_t denom = 2 * m.tp + m.fp + m.fn;
    if (denom > 0) CHECK(r.f1 == doctest::Approx(2.0 * m.tp / static_cast<double>(denom)));
    if (m.tp > 0) CHECK(std::abs(r.f1 - 2.0 * r.tpr * r.ppv / (r.tpr + r.ppv)) < 1e-12);
    CHECK(match_changepoints(truth, est, tol + 1).tp >= m.tp);
  }
}

TEST_CASE("evaluate conventions") {
  RRSeries s(std::vector<double>(3600, 1.0), Idx{100, 2000});
  ChangepointResult perfect;
  perfect.indices = {100, 2000};
  auto r = evaluate(s, perfect, MatchConfig{3});
  CHECK((r.tpr == 1.0 && r.ppv == 1.0 && r.f1 == 1.0 && r.fp_per_hour == 0.0));

  ChangepointResult extra;
  extra.indices = {99, 101, 2000, 3000};
  r = evaluate(s, extra, MatchConfig{3});
  CHECK((r.tp == 2 && r.fp == 2 && r.fn == 0));
  CHECK(r.ppv == 0.5);
  CHECK(r.tpr == 1.0);
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
  CHECK(r.fp_per_hour == doctest::Approx(2.0));

  ChangepointResult none;
  r = evaluate(s, none, MatchConfig{3});
  CHECK((r.ppv == 1.0 && r.tpr == 0.0 && r.f1 == 0.0));

  RRSeries unannotated(std::vector<double>(10, 1.0));
  CHECK_THROWS_WITH_AS(evaluate(unannotated, none, MatchConfig{}), "ground truth required",
                       std::invalid_argument);
  ChangepointResult bad;
  bad.indices = {3600};
  CHECK_THROWS_AS(evaluate(s, bad, MatchConfig{}), std::invalid_argument);
}

TEST_CASE("mean and sample std") {
  const std::vector<double> v{1, 2, 3, 4};
  const auto m = mean_std(v);
  CHECK(m.mean == 2.5);
  CHECK(m.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(mean_std(std::vector<double>{7}).std == 0.0);
}

TEST_CASE("grid defaults mirror the published ranges") {
  const auto g = GridSpec::defaults();
  CHECK(g.rmdm_l0 == Idx{6, 7, 8, 9, 10, 11, 12});
  CHECK(g.bblocks_gamma == std::vector<double>{1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0});
  CHECK(g.bcp_w0.size() == 11);
  CHECK(g.bcp_p0.size() == 11);
  CHECK(g.bcp_cutoff.front() == 0.5);
  CHECK(g.bcp_cutoff.back() == doctest::Approx(1.0));
  CHECK(g.bocd_lambda.size() == 20);
  CHECK(g.bocd_lambda.back() == 2000.0);
  CHECK(g.mbocd_lambda.size() == 10);
  CHECK(g.mbocd_lambda.front() == 10.0);
  CHECK(g.candidates(Algorithm::rmdm).size() == 7);
}

TEST_CASE("grid search: single point, clear winner, ties and errors") {
  const auto corpus = small_corpus(3);
  GridSpec g;
  g.rmdm_l0 = {7};
  auto res = grid_search(Algorithm::rmdm, g, corpus, MatchConfig{3});
  CHECK(std::get<RmdmConfig>(res.best.params).l0 == 7);
  CHECK(res.table.size() == 1);

  // A minimum length far beyond the series forbids every split.
  g.rmdm_l0 = {5000, 7};
  res = grid_search(Algorithm::rmdm, g, corpus, MatchConfig{3});
  CHECK(std::get<RmdmConfig>(res.best.params).l0 == 7);
  CHECK(res.table[1].summary.f1.mean > res.table[0].summary.f1.mean);
  for (std::size_t i = 0; i < res.table.size(); ++i) {
    std::vector<EvalReport> reps;
    for (const auto& s : corpus) reps.push_back(evaluate(s, detect(s, res.table[i].config), MatchConfig{3}));
    CHECK(summarize(reps).f1.mean == res.table[i].summary.f1.mean);
  }

  g.rmdm_l0 = {7, 7};
  res = grid_search(Algorithm::rmdm, g, corpus, MatchConfig{3});
  CHECK(res.table[0].summary.f1.mean == res.table[1].summary.f1.mean);

  CHECK_THROWS_AS(grid_search(Algorithm::rmdm, g, std::span<const RRSeries>{}, MatchConfig{3}),
                  std::invalid_argument);
  std::vector<RRSeries> bare{RRSeries(std::vector<double>(100, 1.0))};
  CHECK_THROWS_AS(grid_search(Algorithm::rmdm, g, bare, MatchConfig{3}), std::invalid_argument);
}

TEST_CASE("grid search is reproducible across job counts") {
  const auto corpus = small_corpus(3);
  GridSpec g = GridSpec::defaults();
  const auto a = grid_search(Algorithm::mbocd, g, corpus, MatchConfig{3}, 1);
  const auto b = grid_search(Algorithm::mbocd, g, corpus, MatchConfig{3}, 3);
  CHECK(grid_table_csv(a) == grid_table_csv(b));
  CHECK(grid_table_csv(a).rfind("stage,params,f1_mean,f1_std,tpr_mean,tpr_std,ppv_mean,ppv_std,"
                                "fp_per_hour_mean,fp_per_hour_std\n",
                                0) == 0);
}

TEST_CASE("bcp grid runs in two stages") {
  const auto corpus = small_corpus(2, 0.05);
  GridSpec g;
  g.bcp_w0 = {0.2, 0.4};
  g.bcp_p0 = {0.3};
  g.bcp_cutoff = {0.5, 0.6, 0.9};
  const auto res = grid_search(Algorithm::bcp, g, corpus, MatchConfig{3});
  REQUIRE(res.table.size() == 5);
  CHECK(res.table[0].stage == 1);
  CHECK(res.table[2].stage == 2);
  CHECK(std::get<BcpConfig>(res.table[2].config.params).cutoff == 0.5);
  // stage-2 rows reuse the stage-1 winner's (w0, p0)
  const auto w1 = std::get<BcpConfig>(res.table[2].config.params).w0;
  CHECK((w1 == 0.2 || w1 == 0.4));
  // each stage-2 row equals a fresh detection at that cutoff
  for (std::size_t i = 2; i < 5; ++i) {
    std::vector<EvalReport> reps;
    for (const auto& s : corpus) reps.push_back(evaluate(s, detect(s, res.table[i].config), MatchConfig{3}));
    CHECK(summarize(reps).f1.mean == doctest::Approx(res.table[i].summary.f1.mean));
  }
}

TEST_CASE("sweeps") {
  const auto corpus = small_corpus(3);
  const std::vector<DetectorConfig> dets{DetectorConfig::defaults(Algorithm::rmdm),
                                         DetectorConfig::defaults(Algorithm::mbocd)};
  SUBCASE("zero noise equals the unperturbed benchmark") {
    const std::vector<double> vals{0.0, 0.01};
    const auto rows = sweep(dets, corpus, SweepAxis::noise, vals, MatchConfig{3}, 5);
    REQUIRE(rows.size() == 4);
    std::vector<EvalReport> reps;
    for (const auto& s : corpus) reps.push_back(evaluate(s, detect(s, dets[0]), MatchConfig{3}));
    CHECK(rows[0].summary.tpr.mean == summarize(reps).tpr.mean);
    CHECK(rows[0].summary.ppv.mean == summarize(reps).ppv.mean);
    CHECK(rows[0].algo == Algorithm::rmdm);
    CHECK(rows[3].axis_value == 0.01);
  }
  SUBCASE("tpr grows with tolerance") {
    const std::vector<double> vals{1, 3, 5, 7};
    const auto rows = sweep(dets, corpus, SweepAxis::tolerance, vals, MatchConfig{3}, 0);
    for (std::size_t i = 1; i < 4; ++i) {
      CHECK(rows[i].summary.tpr.mean >= rows[i - 1].summary.tpr.mean);
      CHECK(rows[4 + i].summary.tpr.mean >= rows[4 + i - 1].summary.tpr.mean);
    }
    CHECK(sweep_csv(rows).rfind("algo,axis_value,tpr_mean,tpr_std,ppv_mean,ppv_std,fp_per_hour_mean,fp_per_hour_std\n", 0) == 0);
  }
  SUBCASE("invalid values") {
    const std::vector<double> bad{-0.1};
    CHECK_THROWS_AS(sweep(dets, corpus, SweepAxis::noise, bad, MatchConfig{3}, 0), std::invalid_argument);
    const std::vector<double> frac{1.5};
    CHECK_THROWS_AS(sweep(dets, corpus, SweepAxis::tolerance, frac, MatchConfig{3}, 0), std::invalid_argument);
    CHECK_THROWS_AS(parse_sweep_axis("jitter"), std::invalid_argument);
  }
}
