#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fleetopt/instance.hpp"
#include "fleetopt/pipeline/regression.hpp"

namespace fleetopt {

/// Deadhead speed used when no duration matrix is supplied.
inline constexpr double kHaversineDeadheadKmh = 25.0;

/// Parses HH:MM:SS (HH may exceed 23 for after-midnight service).
Seconds parse_gtfs_time(std::string_view s);

/// Everything GTFS does not describe: the fleet, chargers, grid and costs.
///
/// JSON: {models:[{id,kind,battery_capacity_kwh,kwh_per_km?}], vehicles:[...],
/// locations:[...] (depots), charging_poles:[...], slot_grid?, costs}
struct FleetConfig {
  InstanceData base;                           // models, vehicles, depots, poles, grid, costs
  std::map<std::string, double> kwh_per_km;    // per model; used for constants and deadheads
};

FleetConfig fleet_from_json(const nlohmann::json& j);

struct GtfsOptions {
  std::filesystem::path dir;
  std::optional<std::filesystem::path> deadhead_matrix;          // CSV from,to,duration_s; else haversine
  std::map<std::string, pipeline::LinearModel> calibrations;      // model id -> energy model
};

/// Builds an instance from trips.txt, stop_times.txt and stops.txt plus the
/// fleet description. One TransitTrip per GTFS trip, spanning its first
/// departure to its last arrival.
InstanceData ingest_gtfs(const GtfsOptions& options, const FleetConfig& fleet);

}  // namespace fleetopt
