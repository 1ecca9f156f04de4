#include "fleetopt/gtfs.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fleetopt/csv.hpp"
#include "fleetopt/geo.hpp"
#include "fleetopt/io.hpp"

namespace fleetopt {

using nlohmann::json;

Seconds parse_gtfs_time(std::string_view s) {
  const auto c1 = s.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : s.find(':', c1 + 1);
  if (c1 == std::string_view::npos || c2 == std::string_view::npos) {
    throw ParseError("bad GTFS time '" + std::string(s) + "'");
  }
  try {
    const auto h = csv::parse_int(s.substr(0, c1), "hours");
    const auto m = csv::parse_int(s.substr(c1 + 1, c2 - c1 - 1), "minutes");
    const auto sec = csv::parse_int(s.substr(c2 + 1), "seconds");
    if (h < 0 || m < 0 || m > 59 || sec < 0 || sec > 59) throw csv::CsvError("field out of range");
    return h * 3600 + m * 60 + sec;
  } catch (const csv::CsvError&) {
    throw ParseError("bad GTFS time '" + std::string(s) + "'");
  }
}

FleetConfig fleet_from_json(const json& j) {
  json full = j;
  // The fleet file is an instance without trips, deadheads and energies.
  full["trips"] = json::array();
  full["deadhead"] = json::array();
  full["trip_energy"] = json::array();
  if (!full.contains("locations")) full["locations"] = json::array();
  FleetConfig fleet;
  fleet.base = instance_from_json(full);
  for (const auto& m : j.at("models")) {
    const auto id = m.at("id").get<std::string>();
    const bool electric = m.at("kind").get<std::string>() == "electric";
    fleet.kwh_per_km[id] = m.value("kwh_per_km", electric ? 1.2 : 4.2);
  }
  return fleet;
}

namespace {

struct StopTime {
  long long sequence;
  std::string stop;
  std::optional<Seconds> arrival;
  std::optional<Seconds> departure;
};

csv::Table require_table(const std::filesystem::path& dir, const char* name) {
  const auto path = dir / name;
  if (!std::filesystem::exists(path)) throw ParseError("missing required GTFS file " + path.string());
  return csv::Table::read(path);
}

std::optional<Seconds> opt_time(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_gtfs_time(s);
}

}  // namespace

InstanceData ingest_gtfs(const GtfsOptions& options, const FleetConfig& fleet) {
  const auto stops = require_table(options.dir, "stops.txt");
  const auto trips = require_table(options.dir, "trips.txt");
  const auto stop_times = require_table(options.dir, "stop_times.txt");

  std::map<std::string, Location> stop_loc;
  for (std::size_t r = 0; r < stops.rows(); ++r) {
    const auto& id = stops.at(r, "stop_id");
    stop_loc[id] = {id, csv::parse_double(stops.at(r, "stop_lat"), "stop_lat"),
                    csv::parse_double(stops.at(r, "stop_lon"), "stop_lon")};
  }
  std::map<std::string, std::vector<StopTime>> by_trip;
  for (std::size_t r = 0; r < trips.rows(); ++r) by_trip[trips.at(r, "trip_id")];

  for (std::size_t r = 0; r < stop_times.rows(); ++r) {
    const auto& trip_id = stop_times.at(r, "trip_id");
    auto it = by_trip.find(trip_id);
    if (it == by_trip.end()) throw ValidationError("stop_times references unknown trip '" + trip_id + "'");
    const auto& stop_id = stop_times.at(r, "stop_id");
    if (!stop_loc.contains(stop_id)) throw ValidationError("stop_times references unknown stop '" + stop_id + "'");
    it->second.push_back({csv::parse_int(stop_times.at(r, "stop_sequence"), "stop_sequence"), stop_id,
                          opt_time(stop_times.at(r, "arrival_time")), opt_time(stop_times.at(r, "departure_time"))});
  }

  InstanceData d = fleet.base;
  std::set<std::string> used_stops;
  std::map<std::string, double> trip_km;
  std::map<std::string, std::vector<double>> trip_legs_m;
  for (auto& [trip_id, times] : by_trip) {
    std::sort(times.begin(), times.end(), [](const StopTime& a, const StopTime& b) { return a.sequence < b.sequence; });
    if (times.size() < 2) throw ValidationError("trip '" + trip_id + "' has fewer than two stop_times (no destination)");
    const auto& first = times.front();
    const auto& last = times.back();
    const auto start = first.departure ? first.departure : first.arrival;
    const auto end = last.arrival ? last.arrival : last.departure;
    if (!start || !end) throw ValidationError("trip '" + trip_id + "' lacks first departure or last arrival time");
    d.trips.push_back({trip_id, first.stop, last.stop, *start, *end});
    used_stops.insert(first.stop);
    used_stops.insert(last.stop);

    auto& legs = trip_legs_m[trip_id];
    double km = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
      const auto& a = stop_loc[times[i - 1].stop];
      const auto& b = stop_loc[times[i].stop];
      legs.push_back(geo::haversine_m(a.lat, a.lon, b.lat, b.lon));
      km += legs.back() / 1000.0;
    }
    trip_km[trip_id] = km;
  }
  for (const auto& id : used_stops) {
    if (std::any_of(d.locations.begin(), d.locations.end(), [&](const Location& l) { return l.id == id; })) {
      throw ValidationError("stop id '" + id + "' collides with a fleet location id");
    }
    d.locations.push_back(stop_loc[id]);
  }

  for (const auto& model : d.models) {
    const auto cal = options.calibrations.find(model.id);
    for (const auto& trip : d.trips) {
      double kwh = 0.0;
      if (cal != options.calibrations.end()) {
        const auto& lm = cal->second;
        std::vector<pipeline::EnergySample> legs;
        for (double m : trip_legs_m[trip.id]) {
          pipeline::EnergySample s;
          const auto& means = lm.feature_means;
          if (means.size() >= pipeline::numeric_feature_names().size()) {
            s.elevation_delta_m = means[1];
            s.temp_c = means[2];
            s.humidity_pct = means[3];
            s.visibility_km = means[4];
            s.precip_mm = means[5];
            s.wind_ms = means[6];
            s.speed_ratio = means[7];
          }
          s.distance_m = m;
          s.road_class = lm.road_classes.empty() ? std::string() : lm.road_classes.front();
          legs.push_back(std::move(s));
        }
        kwh = pipeline::predict_trip_energy(lm, legs);
      } else {
        kwh = fleet.kwh_per_km.at(model.id) * trip_km[trip.id];
      }
      d.trip_energy[{trip.id, model.id}] = round6(kwh);
    }
  }

  std::map<LocationPair, Seconds> matrix;
  if (options.deadhead_matrix) {
    const auto t = csv::Table::read(*options.deadhead_matrix);
    for (std::size_t r = 0; r < t.rows(); ++r) {
      matrix[{t.at(r, "from"), t.at(r, "to")}] = csv::parse_int(t.at(r, "duration_s"), "duration_s");
    }
  }
  for (const auto& a : d.locations) {
    for (const auto& b : d.locations) {
      const double km = geo::haversine_m(a.lat, a.lon, b.lat, b.lon) / 1000.0;
      DeadheadEntry e;
      if (a.id == b.id) {
        e.duration_s = 0;
      } else if (options.deadhead_matrix) {
        auto it = matrix.find({a.id, b.id});
        if (it == matrix.end()) continue;
        e.duration_s = it->second;
      } else {
        e.duration_s = std::llround(km / kHaversineDeadheadKmh * 3600.0);
      }
      for (const auto& model : d.models) {
        e.energy_kwh[model.id] = a.id == b.id ? 0.0 : round6(fleet.kwh_per_km.at(model.id) * km);
      }
      d.deadhead[{a.id, b.id}] = std::move(e);
    }
  }
  // Validate eagerly so callers get cross-reference errors here.
  (void)Instance(d);
  return d;
}

}  // namespace fleetopt
