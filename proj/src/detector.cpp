#include "cpdbench/detector.hpp"

#include "cpdbench/bayesian.hpp"
#include "cpdbench/frequentist.hpp"

namespace cpd {

ChangepointResult detect(const RRSeries& series, const DetectorConfig& config) {
  config.validate();
  ChangepointResult result;
  switch (config.algo) {
    case Algorithm::rmdm:
      result = rmdm_detect(series, std::get<RmdmConfig>(config.params));
      break;
    case Algorithm::binseg:
      result = binseg_detect(series, std::get<CostPenaltyConfig>(config.params));
      break;
    case Algorithm::pelt1:
    case Algorithm::pelt2:
      result = pelt_detect(series, std::get<CostPenaltyConfig>(config.params));
      break;
    case Algorithm::bblocks:
      result = bblocks_detect(series, std::get<BBlocksConfig>(config.params));
      break;
    case Algorithm::bcp:
      result = bcp_detect(series, std::get<BcpConfig>(config.params));
      break;
    case Algorithm::bocd:
      result = bocd_detect(series, std::get<BocdConfig>(config.params));
      break;
    case Algorithm::mbocd:
      result = mbocd_detect(series, std::get<BocdConfig>(config.params));
      break;
  }
  result.detector = config;
  return result;
}

} // namespace cpd
