#include "cpdbench/config.hpp"

#include <cmath>
#include <stdexcept>

#include "cpdbench/series.hpp"
#include "json.hpp"

namespace cpd {

using nlohmann::json;

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::rmdm: return "rmdm";
    case Algorithm::binseg: return "binseg";
    case Algorithm::pelt1: return "pelt1";
    case Algorithm::pelt2: return "pelt2";
    case Algorithm::bblocks: return "bblocks";
    case Algorithm::bcp: return "bcp";
    case Algorithm::bocd: return "bocd";
    case Algorithm::mbocd: return "mbocd";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view id) {
  for (Algorithm a : kAllAlgorithms) {
    if (to_string(a) == id) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(id) + "'");
}

std::string_view to_string(CostKind kind) {
  switch (kind) {
    case CostKind::mean: return "mean";
    case CostKind::mean_and_variance: return "mean_and_variance";
    case CostKind::rms: return "rms";
    case CostKind::linear: return "linear";
  }
  return "?";
}

std::string_view to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::aic: return "aic";
    case PenaltyKind::bic: return "bic";
    case PenaltyKind::hannan_quinn: return "hannan_quinn";
    case PenaltyKind::manual: return "manual";
  }
  return "?";
}

CostKind parse_cost(std::string_view id) {
  for (CostKind k : {CostKind::mean, CostKind::mean_and_variance, CostKind::rms, CostKind::linear}) {
    if (to_string(k) == id) return k;
  }
  throw std::invalid_argument("unknown cost '" + std::string(id) + "'");
}

PenaltyKind parse_penalty(std::string_view id) {
  for (PenaltyKind k :
       {PenaltyKind::aic, PenaltyKind::bic, PenaltyKind::hannan_quinn, PenaltyKind::manual}) {
    if (to_string(k) == id) return k;
  }
  throw std::invalid_argument("unknown penalty '" + std::string(id) + "'");
}

void RmdmConfig::validate() const {
  if (!(p0 > 0.0 && p0 < 1.0)) throw std::invalid_argument("rmdm: p0 must lie in (0, 1)");
  if (l0 < 2) throw std::invalid_argument("rmdm: l0 must be at least 2");
}

int CostPenaltyConfig::num_params() const {
  switch (cost) {
    case CostKind::mean: return 1;
    case CostKind::mean_and_variance: return 2;
    case CostKind::rms: return 1;
    case CostKind::linear: return 2;
  }
  return 1;
}

double CostPenaltyConfig::penalty_value(std::size_t n) const {
  const double p = num_params();
  const double len = static_cast<double>(n);
  switch (penalty) {
    case PenaltyKind::aic: return 2.0 * p;
    case PenaltyKind::bic: return p * std::log(len);
    case PenaltyKind::hannan_quinn: return 2.0 * p * std::log(std::log(len));
    case PenaltyKind::manual: return beta;
  }
  return beta;
}

void CostPenaltyConfig::validate() const {
  if (penalty == PenaltyKind::manual && !(beta >= 0.0 && std::isfinite(beta))) {
    throw std::invalid_argument("manual penalty beta must be finite and >= 0");
  }
}

void BBlocksConfig::validate() const {
  if (!(gamma > 0.0 && std::isfinite(gamma))) throw std::invalid_argument("bblocks: gamma must be > 0");
}

void BcpConfig::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(w0)) throw std::invalid_argument("bcp: w0 must lie in [0, 1]");
  if (!unit(p0)) throw std::invalid_argument("bcp: p0 must lie in [0, 1]");
  if (!unit(cutoff)) throw std::invalid_argument("bcp: cutoff must lie in [0, 1]");
  if (burn_in < 1 || samples < 1) throw std::invalid_argument("bcp: burn_in and samples must be >= 1");
}

void BocdConfig::validate() const {
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) throw std::invalid_argument("bocd: lambda must be >= 1");
  if (!(nu0 > 0.0)) throw std::invalid_argument("bocd: nu0 must be > 0");
  if (!(alpha0 > 0.0)) throw std::invalid_argument("bocd: alpha0 must be > 0");
  if (!(beta0 > 0.0)) throw std::invalid_argument("bocd: beta0 must be > 0");
  if (!std::isfinite(mu0)) throw std::invalid_argument("bocd: mu0 must be finite");
}

DetectorConfig DetectorConfig::defaults(Algorithm algo) {
  switch (algo) {
    case Algorithm::rmdm: return {algo, RmdmConfig{}};
    case Algorithm::binseg:
      return {algo, CostPenaltyConfig{CostKind::mean, PenaltyKind::hannan_quinn, 0.0}};
    case Algorithm::pelt1: return {algo, CostPenaltyConfig{CostKind::mean, PenaltyKind::bic, 0.0}};
    case Algorithm::pelt2: return {algo, CostPenaltyConfig{CostKind::rms, PenaltyKind::bic, 0.0}};
    case Algorithm::bblocks: return {algo, BBlocksConfig{}};
    case Algorithm::bcp: return {algo, BcpConfig{}};
    case Algorithm::bocd: return {algo, BocdConfig{}};
    case Algorithm::mbocd: {
      BocdConfig c;
      c.lambda = 80.0;
      return {algo, c};
    }
  }
  return {};
}

void DetectorConfig::validate() const {
  std::visit([](const auto& p) { p.validate(); }, params);
}

namespace {

json params_json(const DetectorParams& params) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RmdmConfig>) {
          return {{"l0", p.l0}, {"p0", p.p0}};
        } else if constexpr (std::is_same_v<T, CostPenaltyConfig>) {
          json j = {{"cost", to_string(p.cost)}, {"penalty", to_string(p.penalty)}};
          if (p.penalty == PenaltyKind::manual) j["beta"] = p.beta;
          return j;
        } else if constexpr (std::is_same_v<T, BBlocksConfig>) {
          return {{"gamma", p.gamma}};
        } else if constexpr (std::is_same_v<T, BcpConfig>) {
          return {{"w0", p.w0},           {"p0", p.p0},           {"cutoff", p.cutoff},
                  {"burn_in", p.burn_in}, {"samples", p.samples}, {"seed", p.seed}};
        } else {
          return {{"lambda", p.lambda}, {"mu0", p.mu0},       {"nu0", p.nu0},
                  {"alpha0", p.alpha0}, {"beta0", p.beta0}};
        }
      },
      params);
}

template <typename T>
T get_as(const json& value, const char* key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("parameter '") + key + "' has the wrong type");
  }
}

std::size_t get_count(const json& value, const char* key) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    throw std::invalid_argument(std::string("parameter '") + key +
                                "' must be a non-negative integer");
  }
  return value.get<std::size_t>();
}

void apply_params(DetectorConfig& config, const json& j) {
  if (!j.is_object()) throw std::invalid_argument("params must be a JSON object");
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        for (const auto& [key, value] : j.items()) {
          const char* k = key.c_str();
          if constexpr (std::is_same_v<T, RmdmConfig>) {
            if (key == "l0") p.l0 = get_count(value, k);
            else if (key == "p0") p.p0 = get_as<double>(value, k);
            else throw std::invalid_argument("rmdm: unknown parameter '" + key + "'");
          } else if constexpr (std::is_same_v<T, CostPenaltyConfig>) {
            if (key == "cost") p.cost = parse_cost(get_as<std::string>(value, k));
            else if (key == "penalty") p.penalty = parse_penalty(get_as<std::string>(value, k));
            else if (key == "beta") {
              p.beta = get_as<double>(value, k);
              if (!j.contains("penalty")) p.penalty = PenaltyKind::manual;
            } else throw std::invalid_argument("unknown parameter '" + key + "'");
          } else if constexpr (std::is_same_v<T, BBlocksConfig>) {
            if (key == "gamma") p.gamma = get_as<double>(value, k);
            else throw std::invalid_argument("bblocks: unknown parameter '" + key + "'");
          } else if constexpr (std::is_same_v<T, BcpConfig>) {
            if (key == "w0") p.w0 = get_as<double>(value, k);
            else if (key == "p0") p.p0 = get_as<double>(value, k);
            else if (key == "cutoff") p.cutoff = get_as<double>(value, k);
            else if (key == "burn_in") p.burn_in = get_count(value, k);
            else if (key == "samples") p.samples = get_count(value, k);
            else if (key == "seed") p.seed = get_as<std::uint64_t>(value, k);
            else throw std::invalid_argument("bcp: unknown parameter '" + key + "'");
          } else {
            if (key == "lambda") p.lambda = get_as<double>(value, k);
            else if (key == "mu0") p.mu0 = get_as<double>(value, k);
            else if (key == "nu0") p.nu0 = get_as<double>(value, k);
            else if (key == "alpha0") p.alpha0 = get_as<double>(value, k);
            else if (key == "beta0") p.beta0 = get_as<double>(value, k);
            else throw std::invalid_argument("unknown parameter '" + key + "'");
          }
        }
      },
      config.params);
  config.validate();
}

json config_json(const DetectorConfig& config) {
  return {{"algo", to_string(config.algo)}, {"params", params_json(config.params)}};
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

} // namespace

DetectorConfig parse_detector_config(Algorithm algo, std::string_view params_json_text) {
  DetectorConfig config = DetectorConfig::defaults(algo);
  if (params_json_text.empty()) return config;
  apply_params(config, parse_json(params_json_text));
  return config;
}

std::string detector_config_to_json(const DetectorConfig& config) {
  return config_json(config).dump();
}

std::string detector_params_to_json(const DetectorConfig& config) {
  return params_json(config.params).dump();
}

DetectorConfig detector_config_from_json(std::string_view text) {
  const json j = parse_json(text);
  if (!j.is_object() || !j.contains("algo")) {
    throw std::invalid_argument("detector config needs an 'algo' field");
  }
  DetectorConfig config = DetectorConfig::defaults(parse_algorithm(get_as<std::string>(j["algo"], "algo")));
  if (j.contains("params")) apply_params(config, j["params"]);
  return config;
}

std::string result_to_json(const ChangepointResult& result) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["indices"] = result.indices;
  if (result.has_scores()) {
    j["scores"] = result.scores;
  } else {
    j["scores"] = nullptr;
  }
  j["detector"] = config_json(result.detector);
  j["warnings"] = result.warnings;
  return j.dump(2) + "\n";
}

ChangepointResult result_from_json(std::string_view text) {
  const json j = parse_json(text);
  ChangepointResult r;
  try {
    r.indices = j.at("indices").get<std::vector<std::size_t>>();
    if (!j.at("scores").is_null()) r.scores = j.at("scores").get<std::vector<double>>();
    r.detector = detector_config_from_json(j.at("detector").dump());
    if (j.contains("warnings")) r.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed result: ") + e.what());
  }
  if (r.has_scores() && r.scores.size() != r.indices.size()) {
    throw std::invalid_argument("malformed result: scores and indices differ in length");
  }
  return r;
}

} // namespace cpd
