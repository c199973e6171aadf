#pragma once

// Switching-state surrogate for artificial RR tachograms with known state
// transitions, plus ectopic-beat and artifact injection.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpdbench/series.hpp"

namespace cpd {

struct SynthConfig {
  double duration_hours = 24.0;
  std::uint64_t seed = 0;
  std::vector<double> state_means = {0.72, 0.82, 0.92, 1.02};  // seconds
  double dwell_shape = 1.5;      // Pareto exponent of state dwell times
  double dwell_min_beats = 20.0; // Pareto scale
  double rsa_amplitude = 0.015;  // seconds
  double rsa_freq = 0.25;        // Hz
  double mayer_amplitude = 0.04;
  double mayer_freq = 0.1;
  double jitter_std = 0.006;     // white Gaussian jitter, seconds
  double drift_std = 0.02;       // stationary std of the AR(1) wander, seconds
  double drift_beats = 150.0;    // AR(1) correlation length, beats
  double modulation_std = 0.0;   // std of the AR(1) log-amplitude of the fast variability
  double modulation_beats = 100.0;
  double noise_prob = 0.0;
  double ectopy_prob = 0.0;
  std::optional<std::string> label;

  void validate() const;
};

/// Reads a JSON object; absent keys keep their defaults, unknown keys throw
/// std::invalid_argument.
SynthConfig synth_config_from_json(std::string_view json);
std::string synth_config_to_json(const SynthConfig& config);

/// Independent child seed for a numbered stream (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Continuous Pareto(dwell_min_beats, dwell_shape) draws as used for dwell times.
std::vector<double> sample_dwell_times(const SynthConfig& config, std::size_t count,
                                       std::uint64_t seed);

/// Beat-indexed tachogram: every dwell is a rounded Pareto draw, the next
/// state is drawn uniformly from the other states, and both oscillations are
/// evaluated on the elapsed-time axis with random phases. A slow AR(1) wander
/// that ignores state boundaries adds within-state long-range variability, and
/// a log-normal AR(1) gain modulates the amplitude of the fast variability
/// (both oscillations and the jitter). Intervals are
/// clamped at 0.25 s. Truth holds the first beat of every new state.
/// Ectopy then noise are injected when their probabilities are positive.
RRSeries generate(const SynthConfig& config);

/// Each selected beat i (with i + 1 in range) becomes a short-long couplet:
/// rr[i] = 0.6 m, rr[i+1] = 1.4 m with m the mean of the original pair, so
/// elapsed time is unchanged. The compensatory beat is never selected itself.
RRSeries inject_ectopy(const RRSeries& series, double prob, std::uint64_t seed,
                       std::vector<std::size_t>* positions = nullptr);

/// Each selected beat is doubled (missed detection) or halved (spurious
/// detection) with equal probability.
RRSeries inject_noise(const RRSeries& series, double prob, std::uint64_t seed,
                      std::vector<std::size_t>* positions = nullptr);

} // namespace cpd
