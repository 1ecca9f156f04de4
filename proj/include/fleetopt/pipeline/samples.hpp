#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fleetopt/pipeline/network.hpp"
#include "fleetopt/pipeline/telemetry.hpp"

namespace fleetopt::pipeline {

/// One maximal continuous traversal of a road segment.
struct EnergySample {
  std::int64_t segment_id = 0;
  double start_ts = 0.0;
  double end_ts = 0.0;
  double distance_m = 0.0;
  double elevation_delta_m = 0.0;
  std::string road_class;
  double temp_c = 0.0;
  double humidity_pct = 0.0;
  double visibility_km = 0.0;
  double precip_mm = 0.0;
  double wind_ms = 0.0;
  double speed_ratio = 1.0;
  double energy_kwh = 0.0;
};

void write_samples_csv(const std::filesystem::path& path, std::span<const EnergySample> samples);
std::string samples_csv(std::span<const EnergySample> samples);
std::vector<EnergySample> read_samples_csv(const std::filesystem::path& path);

struct WeatherRow {
  double ts_s = 0.0;
  double temp_c = 0.0;
  double humidity_pct = 0.0;
  double visibility_km = 0.0;
  double precip_mm = 0.0;
  double wind_ms = 0.0;
};

struct TrafficRow {
  double ts_s = 0.0;
  double speed_ratio = 1.0;
};

/// Weather CSV: ts_s,temp_c,humidity_pct,visibility_km,precip_mm,wind_ms
std::vector<WeatherRow> read_weather_csv(const std::filesystem::path& path);
/// Traffic CSV: ts_s,speed_ratio
std::vector<TrafficRow> read_traffic_csv(const std::filesystem::path& path);

struct FeatureSources {
  std::vector<WeatherRow> weather;  // empty: weather features stay 0
  std::vector<TrafficRow> traffic;  // empty: speed_ratio stays 1
  double join_horizon_s = 3600.0;
};

class FeatureJoinGap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cuts a matched, labeled trace into per-segment samples.
///
/// `labels` are the kept points of `trace` (from clean_and_label) and
/// `matches` their segment, aligned with `labels`; nullopt marks an unmatched
/// point. A run ends when the segment changes, a point is unmatched, or the
/// trace has a gap (a filtered point). Single-point runs carry no travel and
/// are dropped.
std::vector<EnergySample> make_samples(const RoadNetwork& network, std::span<const TelemetryPoint> trace,
                                       std::span<const LabeledPoint> labels,
                                       std::span<const std::optional<std::int64_t>> matches,
                                       const FeatureSources& features);

}  // namespace fleetopt::pipeline
