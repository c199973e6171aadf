#pragma once

#include "cpdbench/config.hpp"
#include "cpdbench/series.hpp"

namespace cpd {

/// Runs the configured detector on the z-scored intervals of a series.
/// Throws std::invalid_argument for an invalid config or a series below the
/// detector's minimum length (RMDM instead returns an empty result with a warning).
ChangepointResult detect(const RRSeries& series, const DetectorConfig& config);

} // namespace cpd
