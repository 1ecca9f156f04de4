#include "fleetopt/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fleetopt/geo.hpp"
#include "fleetopt/rng.hpp"

namespace fleetopt {

namespace {

constexpr double kCenterLat = 35.0456;
constexpr double kCenterLon = -85.3097;
constexpr double kDetourFactor = 1.3;
constexpr double kServiceSpeedKmh = 18.0;
constexpr double kDeadheadSpeedKmh = 25.0;
constexpr double kEvKwhPerKm = 1.2;
constexpr double kIcevKwhPerKm = 4.2;
constexpr double kEvCapacityKwh = 100.0;
constexpr double kPolePowerKwh = 50.0;

constexpr const char* kEvModel = "ebus";
constexpr const char* kIcevModel = "diesel";

double snap6(double x) { return std::round(x * 1e6) / 1e6; }

std::string padded(const char* prefix, int n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%02d", prefix, n);
  return buf;
}

Location place(const std::string& id, const Location& from, double dist_m, double bearing) {
  geo::LocalProjection proj(from.lat, from.lon);
  double lat = 0;
  double lon = 0;
  proj.to_latlon({dist_m * std::cos(bearing), dist_m * std::sin(bearing)}, lat, lon);
  return {id, snap6(lat), snap6(lon)};
}

double road_km(const Location& a, const Location& b) {
  return geo::haversine_m(a.lat, a.lon, b.lat, b.lon) * kDetourFactor / 1000.0;
}

}  // namespace

InstanceData generate_instance(const GeneratorParams& params) {
  Rng rng(params.seed);
  InstanceData d;
  d.models = {{kEvModel, VehicleKind::electric, kEvCapacityKwh}, {kIcevModel, VehicleKind::liquid_fuel, 0.0}};

  const Location depot{"depot", kCenterLat, kCenterLon};
  d.locations.push_back(depot);
  std::vector<std::pair<Location, Location>> terminals;
  for (int l = 1; l <= params.lines; ++l) {
    const std::string line = padded("L", l);
    const Location a = place(line + "A", depot, rng.uniform(2000, 6000), rng.uniform(0, 2 * std::numbers::pi));
    const Location b = place(line + "B", a, rng.uniform(4000, 8000), rng.uniform(0, 2 * std::numbers::pi));
    d.locations.push_back(a);
    d.locations.push_back(b);
    terminals.emplace_back(a, b);
  }

  for (int l = 1; l <= params.lines; ++l) {
    const auto& [a, b] = terminals[l - 1];
    const double km = road_km(a, b);
    Seconds depart = 5 * 3600 + 1800 + rng.between(0, 18) * 300;  // 05:30 .. 07:00
    for (int k = 1; k <= params.trips_per_line; ++k) {
      const bool outbound = (k % 2) == 1;
      const Seconds duration = static_cast<Seconds>(std::ceil(km / kServiceSpeedKmh * 60.0)) * 60;
      TransitTrip trip{padded("L", l) + padded("T", k), outbound ? a.id : b.id, outbound ? b.id : a.id, depart,
                       depart + duration};
      d.trip_energy[{trip.id, kEvModel}] = snap6(km * kEvKwhPerKm * rng.uniform(0.85, 1.15));
      d.trip_energy[{trip.id, kIcevModel}] = snap6(km * kIcevKwhPerKm * rng.uniform(0.85, 1.15));
      d.trips.push_back(std::move(trip));
      depart += rng.between(6, 18) * 300;  // headway 30 .. 90 min
    }
  }

  for (int i = 1; i <= params.evs; ++i) {
    const double initial = snap6(kEvCapacityKwh * rng.uniform(0.35, 0.6));
    d.vehicles.push_back({padded("EV", i), kEvModel, initial});
  }
  const int icevs = std::min(params.icev_factor * params.lines, kMaxGeneratedIcevs);
  for (int i = 1; i <= icevs; ++i) d.vehicles.push_back({padded("ICEV", i), kIcevModel, 0.0});

  for (int p = 1; p <= 2; ++p) {
    d.charging_poles.push_back({padded("CP", p), depot.id, {{kEvModel, kPolePowerKwh}}});
  }

  for (const auto& from : d.locations) {
    for (const auto& to : d.locations) {
      if (from.id == to.id) {
        d.deadhead[{from.id, to.id}] = {0, {{kEvModel, 0.0}, {kIcevModel, 0.0}}};
        continue;
      }
      const double km = road_km(from, to);
      const auto secs = static_cast<Seconds>(std::ceil(km / kDeadheadSpeedKmh * 3600.0));
      d.deadhead[{from.id, to.id}] = {secs, {{kEvModel, snap6(km * kEvKwhPerKm)}, {kIcevModel, snap6(km * kIcevKwhPerKm)}}};
    }
  }

  d.slot_grid = {0, 86400, 3600};
  d.costs = {1.0, 1.0};
  return d;
}

}  // namespace fleetopt
