#pragma once

#include "stagecast/frame.hpp"

namespace stagecast {

/// Deterministic synthetic station record in the input CSV schema: tidal
/// harmonics, seasonal stochastic rainfall, a saturating catchment-storage
/// response, and threshold-triggered gate/pump releases. Used for desk-scale
/// experiments when no field data is on hand.
TimeSeriesFrame generate_station_frame(std::size_t hours, std::uint64_t seed,
                                       HourStamp start = 0);

/// Writes a frame as a loadable station CSV.
void write_frame_csv(const TimeSeriesFrame& frame, const std::string& path);

}  // namespace stagecast
