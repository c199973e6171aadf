#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "cpdbench/frequentist.hpp"

using namespace cpd;

namespace {

std::vector<double> step_signal(std::uint64_t seed, std::size_t half = 500, double jump = 5.0,
                                double noise = 0.1) {
  oracle::Gen gen(seed);
  std::vector<double> x(2 * half);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i < half ? 0.0 : jump) + noise * gen.normal();
  return x;
}

CostPenaltyConfig random_cost_config(oracle::Gen& gen) {
  CostPenaltyConfig c;
  c.cost = static_cast<CostKind>(gen.index(0, 3));
  c.penalty = static_cast<PenaltyKind>(gen.index(0, 3));
  c.beta = gen.uniform(0.5, 10.0);
  return c;
}

} // namespace

TEST_CASE("t statistic examples") {
  const std::vector<double> ones{1, 1, 1}, zeros{0, 0, 0};
  CHECK(rmdm_t_statistic(ones, ones) == 0.0);
  CHECK(rmdm_t_statistic(zeros, ones) == std::numeric_limits<double>::infinity());
  const std::vector<double> a{0, 1, 0, 1}, b{2, 3, 2, 3};
  CHECK(rmdm_t_statistic(a, b) == doctest::Approx(oracle::pooled_t(a, b)).epsilon(1e-12));
}

TEST_CASE("t statistic matches the textbook pooled t on random samples") {
  oracle::Gen gen(21);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> a(gen.index(2, 40)), b(gen.index(2, 40));
    for (double& v : a) v = gen.normal();
    for (double& v : b) v = gen.normal() + gen.uniform(-2, 2);
    CHECK(rmdm_t_statistic(a, b) == doctest::Approx(oracle::pooled_t(a, b)).epsilon(1e-10));
  }
}

TEST_CASE("significance boundaries and reference values") {
  CHECK(rmdm_significance(0.0, 1000) == 0.0);
  CHECK(rmdm_significance(std::numeric_limits<double>::infinity(), 1000) == 1.0);
  CHECK(rmdm_significance(1e6, 1000) == doctest::Approx(1.0).epsilon(1e-12));
  // 40-digit references for {1 - I_[nu/(nu+t^2)](0.4 nu, 0.4)}^gamma.
  CHECK(rmdm_significance(5.0, 1000) == doctest::Approx(0.99990268661913278730).epsilon(1e-10));
  CHECK(rmdm_significance(3.0, 200) == doctest::Approx(0.94213096434162523747).epsilon(1e-10));
  CHECK(rmdm_significance(4.5, 5000) == doctest::Approx(0.99910092329016185265).epsilon(1e-10));
  CHECK(rmdm_significance(2.5, 50) == doctest::Approx(0.89609830483383339655).epsilon(1e-10));
  CHECK_THROWS_WITH_AS(rmdm_significance(3.0, 15), "series too short for significance model",
                       std::domain_error);
}

TEST_CASE("significance agrees with a quadrature incomplete beta") {
  for (auto [n, t] : {std::pair{1000, 5.0}, {200, 3.0}, {60, 2.0}, {3000, 4.0}}) {
    const double nu = n - 1.0;
    const double gamma = 4.19 * std::log(static_cast<double>(n)) - 11.54;
    const double i = oracle::ibeta_quadrature(0.4 * nu, 0.4, nu / (nu + t * t));
    CHECK(rmdm_significance(t, static_cast<std::size_t>(n)) ==
          doctest::Approx(std::pow(1.0 - i, gamma)).epsilon(1e-7));
  }
}

TEST_CASE("significance is non-decreasing in t") {
  for (std::size_t n : {16u, 50u, 400u, 10000u}) {
    double prev = 0.0;
    for (double t = 0.0; t < 12.0; t += 0.01) {
      const double s = rmdm_significance(t, n);
      CHECK(s >= prev);
      prev = s;
    }
  }
}

TEST_CASE("rmdm: constant series has no changepoints") {
  const std::vector<double> x(300, 0.7);
  CHECK(rmdm_detect(x, RmdmConfig{}).indices.empty());
}

TEST_CASE("rmdm: single step found at the exhaustive-scan maximum") {
  const auto x = step_signal(1);
  const auto r = rmdm_detect(x, RmdmConfig{0.95, 7});
  REQUIRE(r.indices.size() == 1);
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t j = 7; j + 7 <= x.size(); ++j) {
    const double t = oracle::pooled_t(std::span(x).first(j), std::span(x).subspan(j));
    if (t > best) {
      best = t;
      arg = j;
    }
  }
  CHECK(r.indices[0] == arg);
  CHECK(r.indices[0] >= 497);
  CHECK(r.indices[0] <= 503);
  CHECK(r.scores.size() == 1);
}

TEST_CASE("rmdm: too short series warns instead of failing") {
  const std::vector<double> x(10, 1.0);
  const auto r = rmdm_detect(x, RmdmConfig{0.95, 7});
  CHECK(r.indices.empty());
  CHECK_FALSE(r.warnings.empty());
  CHECK(rmdm_detect(RRSeries{}, RmdmConfig{}).warnings.size() == 1);
}

TEST_CASE("rmdm: segments respect l0 and the output is deterministic") {
  oracle::Gen gen(77);
  for (int rep = 0; rep < 60; ++rep) {
    const auto x = gen.steps(gen.index(20, 800), 1.0, 3.0);
    RmdmConfig c{gen.uniform(0.5, 0.99), gen.index(2, 15)};
    const auto r = rmdm_detect(x, c);
    std::size_t prev = 0;
    for (std::size_t idx : r.indices) {
      CHECK(idx - prev >= c.l0);
      prev = idx;
    }
    if (!r.indices.empty()) CHECK(x.size() - prev >= c.l0);
    CHECK(rmdm_detect(x, c).indices == r.indices);
  }
}

TEST_CASE("segment costs by hand") {
  const std::vector<double> flat{2, 2, 2}, line{0, 1, 2, 3}, geo{1, 2, 4, 8};
  CHECK(segment_cost(flat, CostKind::mean) == 0.0);
  CHECK(segment_cost(line, CostKind::linear) == doctest::Approx(0.0));
  CHECK(segment_cost(geo, CostKind::mean) == doctest::Approx(28.75));
  CHECK(segment_cost(geo, CostKind::rms) == doctest::Approx(4.0 * std::log(85.0 / 4.0)));
  CHECK(segment_cost(geo, CostKind::mean_and_variance) == doctest::Approx(4.0 * std::log(28.75 / 4.0)));
  CHECK_THROWS_AS(segment_cost(std::vector<double>{1, 2}, CostKind::linear), std::invalid_argument);
  CHECK_THROWS_AS(segment_cost(std::vector<double>{1}, CostKind::mean_and_variance), std::invalid_argument);
}

TEST_CASE("prefix-sum costs match direct costs") {
  oracle::Gen gen(8);
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = gen.steps(gen.index(5, 60));
    for (CostKind k : {CostKind::mean, CostKind::mean_and_variance, CostKind::rms, CostKind::linear}) {
      SegmentCost cost(x, k);
      const std::size_t b = gen.index(0, x.size() - cost.min_length());
      const std::size_t e = gen.index(b + cost.min_length(), x.size());
      const double direct = oracle::naive_cost(std::span(x).subspan(b, e - b), k);
      CHECK(cost(b, e) == doctest::Approx(direct).epsilon(1e-8).scale(1.0));
      CHECK(segment_cost(std::span(x).subspan(b, e - b), k) == doctest::Approx(direct).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("penalties") {
  CostPenaltyConfig c{CostKind::mean, PenaltyKind::bic, 0};
  CHECK(c.penalty_value(100) == doctest::Approx(std::log(100.0)));
  c.penalty = PenaltyKind::aic;
  CHECK(c.penalty_value(100) == 2.0);
  c.penalty = PenaltyKind::hannan_quinn;
  c.cost = CostKind::mean_and_variance;
  CHECK(c.penalty_value(100) == doctest::Approx(4.0 * std::log(std::log(100.0))));
  c.penalty = PenaltyKind::manual;
  c.beta = 3.5;
  CHECK(c.penalty_value(100) == 3.5);
  CHECK(CostPenaltyConfig{CostKind::linear}.num_params() == 2);
  CHECK(CostPenaltyConfig{CostKind::rms}.num_params() == 1);
}

TEST_CASE("binseg and pelt: constant series and a clean step") {
  const std::vector<double> flat(100, 1.0);
  for (PenaltyKind p : {PenaltyKind::aic, PenaltyKind::bic, PenaltyKind::hannan_quinn}) {
    CostPenaltyConfig c{CostKind::mean, p, 0};
    CHECK(binseg_detect(flat, c).indices.empty());
    CHECK(pelt_detect(flat, c).indices.empty());
  }
  const auto x = step_signal(2);
  CostPenaltyConfig bic{CostKind::mean, PenaltyKind::bic, 0};
  // exhaustive single split
  std::size_t arg = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < x.size(); ++j) {
    const double v = oracle::naive_cost(std::span(x).first(j), CostKind::mean) +
                     oracle::naive_cost(std::span(x).subspan(j), CostKind::mean);
    if (v < best) {
      best = v;
      arg = j;
    }
  }
  CHECK(binseg_detect(x, bic).indices == std::vector<std::size_t>{arg});
  CHECK(pelt_detect(x, bic).indices == std::vector<std::size_t>{arg});
  CHECK_THROWS_AS(pelt_detect(std::vector<double>{1, 2, 3}, bic), std::invalid_argument);
  CHECK_THROWS_AS(binseg_detect(std::vector<double>{1, 2, 3}, bic), std::invalid_argument);
}

TEST_CASE("pelt equals unpruned optimal partitioning") {
  oracle::Gen gen(31);
  for (int rep = 0; rep < 150; ++rep) {
    const auto x = gen.steps(gen.index(4, 120), 1.0, 3.0);
    const auto c = random_cost_config(gen);
    const auto got = pelt_detect(x, c).indices;
    const auto want = oracle::optimal_partition(x, c);
    INFO("cost " << to_string(c.cost) << " penalty " << to_string(c.penalty) << " n " << x.size());
    CHECK(got == want);
  }
}

TEST_CASE("pelt objective never exceeds binary segmentation") {
  oracle::Gen gen(41);
  for (int rep = 0; rep < 150; ++rep) {
    const auto x = gen.steps(gen.index(8, 200), 1.0, 3.0);
    const auto c = random_cost_config(gen);
    const auto p = pelt_detect(x, c).indices;
    const auto b = binseg_detect(x, c).indices;
    CHECK(oracle::objective(x, p, c) <= oracle::objective(x, b, c) + 1e-9 * (1.0 + std::abs(oracle::objective(x, b, c))));
  }
}

TEST_CASE("binseg accepts only splits that pay for the penalty") {
  oracle::Gen gen(42);
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = gen.steps(gen.index(8, 200), 1.0, 3.0);
    CostPenaltyConfig c{CostKind::mean, PenaltyKind::bic, 0};
    const auto cps = binseg_detect(x, c).indices;
    const double beta = c.penalty_value(x.size());
    // Each accepted changepoint must lower the cost of its parent segment by more than beta;
    // in particular no segment of the result can be split profitably by the greedy rule.
    std::vector<std::size_t> bounds{0};
    bounds.insert(bounds.end(), cps.begin(), cps.end());
    bounds.push_back(x.size());
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
      const auto seg = std::span(x).subspan(bounds[k], bounds[k + 1] - bounds[k]);
      const double whole = oracle::naive_cost(seg, CostKind::mean);
      for (std::size_t j = 1; j < seg.size(); ++j) {
        const double split = oracle::naive_cost(seg.first(j), CostKind::mean) +
                             oracle::naive_cost(seg.subspan(j), CostKind::mean);
        CHECK(split + beta >= whole - 1e-9);
      }
    }
  }
}

TEST_CASE("frequentist detectors are deterministic and valid") {
  oracle::Gen gen(51);
  for (int rep = 0; rep < 40; ++rep) {
    const auto x = gen.steps(gen.index(4, 300));
    const auto c = random_cost_config(gen);
    const auto a = binseg_detect(x, c), b = binseg_detect(x, c);
    CHECK(a.indices == b.indices);
    CHECK_NOTHROW(check_changepoints(a.indices, x.size()));
    CHECK_NOTHROW(check_changepoints(pelt_detect(x, c).indices, x.size()));
  }
}
