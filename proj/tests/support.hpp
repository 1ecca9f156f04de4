#pragma once

#include <filesystem>
#include <string>

#include "fleetopt/instance.hpp"

namespace fleetopt::testing {

/// Hand-built instances for unit tests. Models are "diesel" (liquid fuel) and
/// "ev" (electric, capacity given at construction); every location pair gets a
/// deadhead entry only when added explicitly.
class Builder {
 public:
  explicit Builder(double ev_capacity = 100.0) {
    d_.models = {{"diesel", VehicleKind::liquid_fuel, 0.0}, {"ev", VehicleKind::electric, ev_capacity}};
    d_.slot_grid = {0, 4 * 3600, 3600};
  }

  Builder& grid(Seconds start, Seconds end, Seconds len) {
    d_.slot_grid = {start, end, len};
    return *this;
  }
  Builder& costs(double k_gas, double k_elec) {
    d_.costs = {k_gas, k_elec};
    return *this;
  }
  Builder& location(const std::string& id, double lat = 35.0, double lon = -85.0) {
    d_.locations.push_back({id, lat, lon});
    return *this;
  }
  Builder& diesel(const std::string& id) {
    d_.vehicles.push_back({id, "diesel", 0.0});
    return *this;
  }
  Builder& ev(const std::string& id, double initial) {
    d_.vehicles.push_back({id, "ev", initial});
    return *this;
  }
  Builder& trip(const std::string& id, const std::string& from, const std::string& to, Seconds start, Seconds end,
                double diesel_kwh, double ev_kwh) {
    d_.trips.push_back({id, from, to, start, end});
    d_.trip_energy[{id, "diesel"}] = diesel_kwh;
    d_.trip_energy[{id, "ev"}] = ev_kwh;
    return *this;
  }
  Builder& deadhead(const std::string& from, const std::string& to, Seconds duration, double diesel_kwh,
                    double ev_kwh) {
    d_.deadhead[{from, to}] = DeadheadEntry{duration, {{"diesel", diesel_kwh}, {"ev", ev_kwh}}};
    return *this;
  }
  /// Both directions with the same duration and energy.
  Builder& link(const std::string& a, const std::string& b, Seconds duration, double diesel_kwh, double ev_kwh) {
    deadhead(a, b, duration, diesel_kwh, ev_kwh);
    return deadhead(b, a, duration, diesel_kwh, ev_kwh);
  }
  Builder& pole(const std::string& id, const std::string& at, double kwh_per_slot) {
    d_.charging_poles.push_back({id, at, {{"ev", kwh_per_slot}}});
    return *this;
  }

  InstanceData& data() { return d_; }
  Instance build() const { return Instance(d_); }

 private:
  InstanceData d_;
};

inline std::filesystem::path data_dir() { return FLEETOPT_TEST_DATA; }

}  // namespace fleetopt::testing
