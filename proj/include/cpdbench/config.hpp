#pragma once

// Detector configurations and the result record every detector returns.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cpd {

enum class Algorithm { rmdm, binseg, pelt1, pelt2, bblocks, bcp, bocd, mbocd };

inline constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::rmdm,    Algorithm::binseg, Algorithm::pelt1, Algorithm::pelt2,
    Algorithm::bblocks, Algorithm::bcp,    Algorithm::bocd,  Algorithm::mbocd};

std::string_view to_string(Algorithm algo);
/// Throws std::invalid_argument for an unknown id.
Algorithm parse_algorithm(std::string_view id);

struct RmdmConfig {
  double p0 = 0.95;
  std::size_t l0 = 7;
  void validate() const;
};

enum class CostKind { mean, mean_and_variance, rms, linear };
enum class PenaltyKind { aic, bic, hannan_quinn, manual };

std::string_view to_string(CostKind kind);
std::string_view to_string(PenaltyKind kind);
CostKind parse_cost(std::string_view id);
PenaltyKind parse_penalty(std::string_view id);

struct CostPenaltyConfig {
  CostKind cost = CostKind::mean;
  PenaltyKind penalty = PenaltyKind::bic;
  double beta = 0.0;  // only read for PenaltyKind::manual

  /// Free parameters per segment: mean 1, mean_and_variance 2, rms 1, linear 2.
  int num_params() const;
  /// Penalty for a series of length n: AIC 2p, BIC p ln n, HQ 2p ln ln n.
  double penalty_value(std::size_t n) const;
  void validate() const;
};

struct BBlocksConfig {
  double gamma = 4.0;
  void validate() const;
};

struct BcpConfig {
  double w0 = 0.2;
  double p0 = 0.3;
  double cutoff = 0.6;
  std::size_t burn_in = 500;
  std::size_t samples = 500;
  std::uint64_t seed = 0;
  void validate() const;
};

struct BocdConfig {
  double lambda = 1840.0;
  double mu0 = 0.0;
  double nu0 = 1.0;
  double alpha0 = 1.0;
  double beta0 = 1.0;
  void validate() const;
};

using DetectorParams =
    std::variant<RmdmConfig, CostPenaltyConfig, BBlocksConfig, BcpConfig, BocdConfig>;

struct DetectorConfig {
  Algorithm algo = Algorithm::rmdm;
  DetectorParams params = RmdmConfig{};

  /// Selected optima for RR data: RMDM l0=7, BiS mean+HQ, PELT1 mean+BIC,
  /// PELT2 rms+BIC, BBlocks gamma=4, BCP w0=0.2 p0=0.3 cutoff=0.6,
  /// BOCD lambda=1840, mBOCD lambda=80.
  static DetectorConfig defaults(Algorithm algo);

  void validate() const;
};

/// Parses a params object (JSON text) for `algo`, starting from the defaults.
/// Unknown keys and out-of-range values throw std::invalid_argument.
DetectorConfig parse_detector_config(Algorithm algo, std::string_view params_json);
/// {"algo": ..., "params": {...}}
std::string detector_config_to_json(const DetectorConfig& config);
std::string detector_params_to_json(const DetectorConfig& config);
DetectorConfig detector_config_from_json(std::string_view json);

struct ChangepointResult {
  std::vector<std::size_t> indices;
  std::vector<double> scores;  // empty, or aligned with indices
  DetectorConfig detector;
  std::vector<std::string> warnings;

  bool has_scores() const { return !scores.empty(); }
};

inline constexpr int kSchemaVersion = 1;

/// {"schema_version", "indices", "scores" (array or null), "detector", "warnings"}
std::string result_to_json(const ChangepointResult& result);
ChangepointResult result_from_json(std::string_view json);

} // namespace cpd
