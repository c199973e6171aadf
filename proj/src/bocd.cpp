#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cpdbench/bayesian.hpp"
#include "cpdbench/special.hpp"

namespace cpd {
namespace {

// Run-length hypotheses more than e^-50 below the MAP are dropped on long series.
constexpr double kPruneLog = 50.0;

} // namespace

double NigParams::log_predictive(double x) const {
  return math::student_t_logpdf(x, 2.0 * alpha, mu, beta * (nu + 1.0) / (alpha * nu));
}

NigParams NigParams::updated(double x) const {
  const double d = x - mu;
  return {(nu * mu + x) / (nu + 1.0), nu + 1.0, alpha + 0.5, beta + nu * d * d / (2.0 * (nu + 1.0))};
}

std::size_t BocdState::map_run_length() const {
  if (log_prob.empty()) return 0;
  const auto it = std::max_element(log_prob.begin(), log_prob.end());
  return run_length[static_cast<std::size_t>(it - log_prob.begin())];
}

BocdState bocd_initial_state(const BocdConfig& config) {
  config.validate();
  BocdState state;
  state.run_length = {0};
  state.log_prob = {0.0};
  state.params = {NigParams::prior(config)};
  return state;
}

BocdState bocd_step(BocdState state, double x, const BocdConfig& config, double prune_below) {
  const double log_h = -std::log(config.lambda);
  const double log_1mh = std::log1p(-1.0 / config.lambda);
  const std::size_t m = state.log_prob.size();

  BocdState next;
  next.t = state.t + 1;
  next.run_length.reserve(m + 1);
  next.log_prob.reserve(m + 1);
  next.params.reserve(m + 1);

  std::vector<double> joint(m);
  for (std::size_t k = 0; k < m; ++k) {
    joint[k] = state.log_prob[k] + state.params[k].log_predictive(x);
  }
  next.run_length.push_back(0);
  next.log_prob.push_back(math::log_sum_exp(joint) + log_h);
  next.params.push_back(NigParams::prior(config));
  for (std::size_t k = 0; k < m; ++k) {
    next.run_length.push_back(state.run_length[k] + 1);
    next.log_prob.push_back(joint[k] + log_1mh);
    next.params.push_back(state.params[k].updated(x));
  }

  const double evidence = math::log_sum_exp(next.log_prob);
  double top = math::kNegInf;
  for (double& lp : next.log_prob) {
    lp -= evidence;
    top = std::max(top, lp);
  }

  if (std::isfinite(prune_below)) {
    std::size_t kept = 0;
    for (std::size_t k = 0; k < next.log_prob.size(); ++k) {
      if (next.log_prob[k] >= top - prune_below) {
        next.run_length[kept] = next.run_length[k];
        next.log_prob[kept] = next.log_prob[k];
        next.params[kept] = next.params[k];
        ++kept;
      }
    }
    next.run_length.resize(kept);
    next.log_prob.resize(kept);
    next.params.resize(kept);
  }
  return next;
}

RunLengthPosterior bocd_posterior(std::span<const double> signal, const BocdConfig& config) {
  RunLengthPosterior out;
  BocdState state = bocd_initial_state(config);
  for (double x : signal) {
    state = bocd_step(std::move(state), x, config);
    std::vector<double> probs(state.t + 1, 0.0);
    for (std::size_t k = 0; k < state.log_prob.size(); ++k) {
      probs[state.run_length[k]] = std::exp(state.log_prob[k]);
    }
    out.probs.push_back(std::move(probs));
    out.map_run_length.push_back(state.map_run_length());
  }
  return out;
}

std::vector<std::size_t> bocd_map_trace(std::span<const double> signal, const BocdConfig& config) {
  std::vector<std::size_t> trace;
  trace.reserve(signal.size());
  BocdState state = bocd_initial_state(config);
  for (double x : signal) {
    state = bocd_step(std::move(state), x, config, kPruneLog);
    trace.push_back(state.map_run_length());
  }
  return trace;
}

std::vector<std::size_t> changepoints_from_map_trace(std::span<const std::size_t> trace) {
  const std::size_t n = trace.size();
  std::vector<std::size_t> out;
  for (std::size_t t = 1; t < n; ++t) {
    if (trace[t] >= trace[t - 1]) continue;
    const std::size_t index = t + 1 - trace[t];
    if (index >= 1 && index < n) out.push_back(index);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ChangepointResult bocd_detect(std::span<const double> signal, const BocdConfig& config) {
  config.validate();
  if (signal.size() < 2) throw std::invalid_argument("bocd needs at least 2 samples");
  ChangepointResult result;
  result.detector = {Algorithm::bocd, config};
  result.indices = changepoints_from_map_trace(bocd_map_trace(signal, config));
  return result;
}

ChangepointResult bocd_detect(const RRSeries& series, const BocdConfig& config) {
  if (series.size() < 2) throw std::invalid_argument("bocd needs at least 2 samples");
  return bocd_detect(normalize(series), config);
}

namespace {

struct MbocdOutcome {
  std::vector<std::size_t> run_lengths;
  ChangepointResult result;
};

// The full run-length filter is kept between resets. With the changepoint
// mass computed from each run's own predictive, the normalized probability
// P(r_t = 0 | x_1:t) is always H. The growth term
// (1 - H) sum_r P(r | x_1:t-1) pi_r(x_t) is compared against it, so a segment
// ends when the filter's predictive density for x_t drops below H / (1 - H);
// the filter then restarts from the prior.
MbocdOutcome run_mbocd(std::span<const double> signal, const BocdConfig& config) {
  config.validate();
  const double log_h = -std::log(config.lambda);
  const double log_1mh = std::log1p(-1.0 / config.lambda);

  MbocdOutcome out;
  out.result.detector = {Algorithm::mbocd, config};
  out.run_lengths.reserve(signal.size());
  BocdState state = bocd_initial_state(config);
  std::vector<double> joint;
  std::size_t r = 0;
  for (std::size_t t = 0; t < signal.size(); ++t) {
    const double x = signal[t];
    joint.resize(state.log_prob.size());
    for (std::size_t k = 0; k < joint.size(); ++k) {
      joint[k] = state.log_prob[k] + state.params[k].log_predictive(x);
    }
    const double growth = math::log_sum_exp(joint) + log_1mh;
    if (log_h > growth) {
      r = 0;
      state = bocd_initial_state(config);
      if (t >= 1) {
        out.result.indices.push_back(t);
        out.result.scores.push_back(1.0 / (1.0 + std::exp(growth - log_h)));
      }
    } else {
      ++r;
      state = bocd_step(std::move(state), x, config, kPruneLog);
    }
    out.run_lengths.push_back(r);
  }
  return out;
}

} // namespace

std::vector<std::size_t> mbocd_run_lengths(std::span<const double> signal, const BocdConfig& config) {
  return run_mbocd(signal, config).run_lengths;
}

ChangepointResult mbocd_detect(std::span<const double> signal, const BocdConfig& config) {
  config.validate();
  if (signal.size() < 2) throw std::invalid_argument("mbocd needs at least 2 samples");
  return run_mbocd(signal, config).result;
}

ChangepointResult mbocd_detect(const RRSeries& series, const BocdConfig& config) {
  if (series.size() < 2) throw std::invalid_argument("mbocd needs at least 2 samples");
  return mbocd_detect(normalize(series), config);
}

} // namespace cpd
