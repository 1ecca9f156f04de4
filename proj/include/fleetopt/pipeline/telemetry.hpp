#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fleetopt/instance.hpp"

namespace fleetopt::pipeline {

/// One telemetry record. Electric traces carry current/voltage/SoC/cable,
/// liquid-fuel traces carry the tank level in gallons.
struct TelemetryPoint {
  double ts_s = 0.0;
  double lat = 0.0;
  double lon = 0.0;
  std::optional<double> current_a;
  std::optional<double> voltage_v;
  std::optional<double> soc_pct;
  std::optional<int> cable;
  std::optional<double> fuel_gal;
};

using TelemetryTrace = std::vector<TelemetryPoint>;

/// Columns ts_s,lat,lon,current_a,voltage_v,soc_pct,cable,fuel_gal; blank = absent.
TelemetryTrace read_trace_csv(const std::filesystem::path& path);
std::string trace_csv(std::span<const TelemetryPoint> trace);

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

/// Simple polygon in lat/lon (ring, first vertex not repeated).
using Geofence = std::vector<LatLon>;

bool inside(const Geofence& fence, LatLon p);

struct LabelOptions {
  std::vector<Geofence> garages;
  double kwh_per_gallon = kDieselKwhPerGallon;
};

/// Energy consumed between kept point `index` and the trace point before it.
/// Zero when the predecessor was filtered out (a fresh run starts there).
struct LabeledPoint {
  std::size_t index = 0;
  double energy_kwh = 0.0;
};

class EmptyAfterFilter : public std::runtime_error {
 public:
  EmptyAfterFilter() : std::runtime_error("no telemetry points left after filtering") {}
};

class NonMonotonicTimestamps : public std::runtime_error {
 public:
  explicit NonMonotonicTimestamps(std::size_t index)
      : std::runtime_error("timestamps not strictly increasing at point " + std::to_string(index)) {}
};

/// Drops charging (cable = 1) and in-garage points, then labels energy:
/// electric E_i = A_i * V_i * (TS_i - TS_{i-1}) joules, converted to kWh;
/// liquid fuel: tank drop in gallons times kWh per gallon, refuelling
/// intervals (tank level rising) dropped.
std::vector<LabeledPoint> clean_and_label(std::span<const TelemetryPoint> trace, VehicleKind kind,
                                          const LabelOptions& options = {});

}  // namespace fleetopt::pipeline
