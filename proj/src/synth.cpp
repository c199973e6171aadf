#include "cpdbench/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace cpd {
namespace {

using nlohmann::json;

constexpr double kMinInterval = 0.25;

double pareto_draw(std::mt19937_64& rng, double scale, double shape) {
  // Inverse CDF on (0, 1]; 1 - U avoids log(0).
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = 1.0 - unif(rng);
  return scale * std::pow(u, -1.0 / shape);
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  }
}

} // namespace

void SynthConfig::validate() const {
  if (!(duration_hours > 0.0) || !std::isfinite(duration_hours)) {
    throw std::invalid_argument("duration_hours must be positive");
  }
  if (state_means.empty()) throw std::invalid_argument("state_means must not be empty");
  for (double m : state_means) {
    if (!(m >= kMinInterval) || !std::isfinite(m)) {
      throw std::invalid_argument("state means must be finite and at least 0.25 s");
    }
  }
  if (!(dwell_shape > 0.0)) throw std::invalid_argument("dwell_shape must be positive");
  if (!(dwell_min_beats >= 1.0)) throw std::invalid_argument("dwell_min_beats must be at least 1");
  for (double a : {rsa_amplitude, mayer_amplitude, jitter_std, drift_std, modulation_std}) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument("amplitudes and jitter must be non-negative");
    }
  }
  if (!(drift_beats > 0.0) || !(modulation_beats > 0.0)) {
    throw std::invalid_argument("drift_beats and modulation_beats must be positive");
  }
  if (!(rsa_freq >= 0.0) || !(mayer_freq >= 0.0)) {
    throw std::invalid_argument("oscillation frequencies must be non-negative");
  }
  check_probability(noise_prob, "noise_prob");
  check_probability(ectopy_prob, "ectopy_prob");
}

SynthConfig synth_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("synth config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("synth config must be a JSON object");
  SynthConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "duration_hours") c.duration_hours = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "state_means") c.state_means = value.get<std::vector<double>>();
      else if (key == "dwell_shape") c.dwell_shape = value.get<double>();
      else if (key == "dwell_min_beats") c.dwell_min_beats = value.get<double>();
      else if (key == "rsa_amplitude") c.rsa_amplitude = value.get<double>();
      else if (key == "rsa_freq") c.rsa_freq = value.get<double>();
      else if (key == "mayer_amplitude") c.mayer_amplitude = value.get<double>();
      else if (key == "mayer_freq") c.mayer_freq = value.get<double>();
      else if (key == "jitter_std") c.jitter_std = value.get<double>();
      else if (key == "drift_std") c.drift_std = value.get<double>();
      else if (key == "drift_beats") c.drift_beats = value.get<double>();
      else if (key == "modulation_std") c.modulation_std = value.get<double>();
      else if (key == "modulation_beats") c.modulation_beats = value.get<double>();
      else if (key == "noise_prob") c.noise_prob = value.get<double>();
      else if (key == "ectopy_prob") c.ectopy_prob = value.get<double>();
      else if (key == "label") {
        if (value.is_null()) c.label.reset();
        else c.label = value.get<std::string>();
      } else {
        throw std::invalid_argument("synth config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("synth config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string synth_config_to_json(const SynthConfig& c) {
  json j = {{"duration_hours", c.duration_hours},
            {"seed", c.seed},
            {"state_means", c.state_means},
            {"dwell_shape", c.dwell_shape},
            {"dwell_min_beats", c.dwell_min_beats},
            {"rsa_amplitude", c.rsa_amplitude},
            {"rsa_freq", c.rsa_freq},
            {"mayer_amplitude", c.mayer_amplitude},
            {"mayer_freq", c.mayer_freq},
            {"jitter_std", c.jitter_std},
            {"drift_std", c.drift_std},
            {"drift_beats", c.drift_beats},
            {"modulation_std", c.modulation_std},
            {"modulation_beats", c.modulation_beats},
            {"noise_prob", c.noise_prob},
            {"ectopy_prob", c.ectopy_prob}};
  j["label"] = c.label ? json(*c.label) : json(nullptr);
  return j.dump();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<double> sample_dwell_times(const SynthConfig& config, std::size_t count,
                                       std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::vector<double> out(count);
  for (double& v : out) v = pareto_draw(rng, config.dwell_min_beats, config.dwell_shape);
  return out;
}

RRSeries generate(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(derive_seed(config.seed, 0));
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> jitter(0.0, 1.0);

  const double total = config.duration_hours * 3600.0;
  const double rsa_phase = phase_dist(rng);
  const double mayer_phase = phase_dist(rng);
  const std::size_t n_states = config.state_means.size();
  std::size_t state = std::uniform_int_distribution<std::size_t>(0, n_states - 1)(rng);
  auto next_dwell = [&] {
    return static_cast<std::size_t>(
        std::llround(pareto_draw(rng, config.dwell_min_beats, config.dwell_shape)));
  };
  std::size_t remaining = next_dwell();
  auto ar1 = [](double std, double beats) {
    const double phi = std::exp(-1.0 / beats);
    return std::pair{phi, std * std::sqrt(1.0 - phi * phi)};
  };
  const auto [drift_phi, drift_innovation] = ar1(config.drift_std, config.drift_beats);
  const auto [gain_phi, gain_innovation] = ar1(config.modulation_std, config.modulation_beats);
  double drift = config.drift_std * jitter(rng);
  double log_gain = config.modulation_std * jitter(rng);

  std::vector<double> rr;
  std::vector<std::size_t> truth;
  double elapsed = 0.0;
  while (elapsed < total) {
    if (remaining == 0) {
      if (n_states > 1) {
        // Uniform over the other states.
        std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n_states - 2)(rng);
        state = pick >= state ? pick + 1 : pick;
        truth.push_back(rr.size());
      }
      remaining = next_dwell();
    }
    const double two_pi_t = 2.0 * std::numbers::pi * elapsed;
    const double fast = config.rsa_amplitude * std::sin(config.rsa_freq * two_pi_t + rsa_phase) +
                        config.mayer_amplitude * std::sin(config.mayer_freq * two_pi_t + mayer_phase) +
                        config.jitter_std * jitter(rng);
    double v = config.state_means[state] + drift + std::exp(log_gain) * fast;
    drift = drift_phi * drift + drift_innovation * jitter(rng);
    log_gain = gain_phi * log_gain + gain_innovation * jitter(rng);
    v = std::max(v, kMinInterval);
    rr.push_back(v);
    elapsed += v;
    --remaining;
  }

  RRSeries series(std::move(rr), std::move(truth), {}, config.label);
  if (config.ectopy_prob > 0.0) {
    series = inject_ectopy(series, config.ectopy_prob, derive_seed(config.seed, 1));
  }
  if (config.noise_prob > 0.0) {
    series = inject_noise(series, config.noise_prob, derive_seed(config.seed, 2));
  }
  return series;
}

RRSeries inject_ectopy(const RRSeries& series, double prob, std::uint64_t seed,
                       std::vector<std::size_t>* positions) {
  check_probability(prob, "ectopy probability");
  if (positions) positions->clear();
  if (prob == 0.0) return series;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution hit(prob);
  std::vector<double> rr(series.intervals().begin(), series.intervals().end());
  for (std::size_t i = 0; i + 1 < rr.size(); ++i) {
    if (!hit(rng)) continue;
    const double m = 0.5 * (rr[i] + rr[i + 1]);
    const double sum = rr[i] + rr[i + 1];
    rr[i] = 0.6 * m;
    rr[i + 1] = sum - rr[i];
    if (positions) positions->push_back(i);
    ++i;
  }
  return series.with_intervals(std::move(rr));
}

RRSeries inject_noise(const RRSeries& series, double prob, std::uint64_t seed,
                      std::vector<std::size_t>* positions) {
  check_probability(prob, "noise probability");
  if (positions) positions->clear();
  if (prob == 0.0) return series;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> rr(series.intervals().begin(), series.intervals().end());
  for (std::size_t i = 0; i < rr.size(); ++i) {
    // Two uniforms per beat regardless of outcome, so the artifact positions
    // for a smaller prob are a subset of those for a larger one.
    const double u = unif(rng);
    const bool doubled = unif(rng) < 0.5;
    if (u >= prob) continue;
    rr[i] *= doubled ? 2.0 : 0.5;
    if (positions) positions->push_back(i);
  }
  return series.with_intervals(std::move(rr));
}

} // namespace cpd
