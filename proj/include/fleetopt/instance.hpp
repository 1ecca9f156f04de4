#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fleetopt {

using Seconds = std::int64_t;

/// Dense index of an entity inside an Instance. Entities are kept sorted by id,
/// so index order equals lexicographic id order.
using VehicleIdx = std::uint32_t;
using TripIdx = std::uint32_t;
using PoleIdx = std::uint32_t;
using LocationIdx = std::uint32_t;
using ModelIdx = std::uint32_t;
using SlotIdx = std::int32_t;

inline constexpr double kDieselKwhPerGallon = 37.95;

enum class VehicleKind { liquid_fuel, electric };

const char* to_string(VehicleKind kind);
VehicleKind vehicle_kind_from_string(const std::string& s);

struct VehicleModelSpec {
  std::string id;
  VehicleKind kind = VehicleKind::liquid_fuel;
  double battery_capacity_kwh = 0.0;
  bool operator==(const VehicleModelSpec&) const = default;
};

struct Vehicle {
  std::string id;
  std::string model;
  double initial_charge_kwh = 0.0;
  bool operator==(const Vehicle&) const = default;
};

struct Location {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
  bool operator==(const Location&) const = default;
};

struct TransitTrip {
  std::string id;
  std::string origin;
  std::string destination;
  Seconds start_s = 0;
  Seconds end_s = 0;
  bool operator==(const TransitTrip&) const = default;
};

struct ChargingPole {
  std::string id;
  std::string location;
  std::map<std::string, double> power_per_slot_kwh;  // model id -> kWh per slot
  bool operator==(const ChargingPole&) const = default;
};

/// Uniform slots; slot k spans [day_start + k*len, day_start + (k+1)*len).
struct SlotGrid {
  Seconds day_start_s = 0;
  Seconds day_end_s = 86400;
  Seconds slot_length_s = 3600;

  SlotIdx count() const { return static_cast<SlotIdx>((day_end_s - day_start_s) / slot_length_s); }
  Seconds slot_start(SlotIdx k) const { return day_start_s + k * slot_length_s; }
  Seconds slot_end(SlotIdx k) const { return day_start_s + (k + 1) * slot_length_s; }
  /// First slot whose end is >= t, clamped to the grid. Events at time t are
  /// booked against this slot ("completed by the end of slot s").
  SlotIdx slot_of(Seconds t) const;

  bool operator==(const SlotGrid&) const = default;
};

struct DeadheadEntry {
  Seconds duration_s = 0;
  std::map<std::string, double> energy_kwh;  // model id -> kWh
  bool operator==(const DeadheadEntry&) const = default;
};

struct CostParams {
  double k_gas = 1.0;
  double k_elec = 1.0;
  bool operator==(const CostParams&) const = default;
};

using LocationPair = std::pair<std::string, std::string>;
using TripModelPair = std::pair<std::string, std::string>;

/// Plain, unvalidated instance content as read from or written to JSON.
struct InstanceData {
  std::vector<VehicleModelSpec> models;
  std::vector<Vehicle> vehicles;
  std::vector<Location> locations;
  std::vector<TransitTrip> trips;
  std::vector<ChargingPole> charging_poles;
  SlotGrid slot_grid;
  std::map<LocationPair, DeadheadEntry> deadhead;
  std::map<TripModelPair, double> trip_energy;
  CostParams costs;

  bool operator==(const InstanceData&) const = default;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingDeadhead : public std::runtime_error {
 public:
  MissingDeadhead(const std::string& from, const std::string& to)
      : std::runtime_error("missing deadhead " + from + " -> " + to) {}
};

/// Validated, immutable optimization input with dense lookup tables.
class Instance {
 public:
  explicit Instance(InstanceData data);

  const InstanceData& data() const { return data_; }

  std::size_t vehicle_count() const { return data_.vehicles.size(); }
  std::size_t trip_count() const { return data_.trips.size(); }
  std::size_t pole_count() const { return data_.charging_poles.size(); }
  std::size_t location_count() const { return data_.locations.size(); }
  SlotIdx slot_count() const { return data_.slot_grid.count(); }
  const SlotGrid& slots() const { return data_.slot_grid; }

  const Vehicle& vehicle(VehicleIdx v) const { return data_.vehicles[v]; }
  const TransitTrip& trip(TripIdx t) const { return data_.trips[t]; }
  const ChargingPole& pole(PoleIdx p) const { return data_.charging_poles[p]; }
  const Location& location(LocationIdx l) const { return data_.locations[l]; }
  const VehicleModelSpec& model_of(VehicleIdx v) const { return data_.models[vehicle_model_[v]]; }
  ModelIdx model_index(VehicleIdx v) const { return vehicle_model_[v]; }

  bool is_electric(VehicleIdx v) const { return model_of(v).kind == VehicleKind::electric; }
  double capacity(VehicleIdx v) const { return model_of(v).battery_capacity_kwh; }
  double initial_charge(VehicleIdx v) const { return data_.vehicles[v].initial_charge_kwh; }
  /// K^{M_v}: the per-kWh weight of the vehicle's energy in the objective.
  double cost_weight(VehicleIdx v) const {
    return is_electric(v) ? data_.costs.k_elec : data_.costs.k_gas;
  }

  LocationIdx trip_origin(TripIdx t) const { return trip_origin_[t]; }
  LocationIdx trip_destination(TripIdx t) const { return trip_dest_[t]; }
  LocationIdx pole_location(PoleIdx p) const { return pole_location_[p]; }

  double trip_energy(VehicleIdx v, TripIdx t) const {
    return trip_energy_[static_cast<std::size_t>(t) * data_.models.size() + vehicle_model_[v]];
  }
  /// Energy one slot on pole p charges into vehicle v.
  double pole_power(PoleIdx p, VehicleIdx v) const {
    return pole_power_[static_cast<std::size_t>(p) * data_.models.size() + vehicle_model_[v]];
  }

  bool has_deadhead(LocationIdx from, LocationIdx to) const {
    return deadhead_duration_[cell(from, to)] >= 0;
  }
  /// Directed D(from, to); std::numeric_limits<Seconds>::max() when the pair is absent.
  Seconds deadhead_time(LocationIdx from, LocationIdx to) const {
    const Seconds d = deadhead_duration_[cell(from, to)];
    return d < 0 ? std::numeric_limits<Seconds>::max() : d;
  }
  /// E(v, T(from, to)); zero for absent pairs (they are never time-feasible).
  double deadhead_energy(VehicleIdx v, LocationIdx from, LocationIdx to) const {
    return deadhead_energy_[cell(from, to) * data_.models.size() + vehicle_model_[v]];
  }

  std::optional<VehicleIdx> find_vehicle(const std::string& id) const;
  std::optional<TripIdx> find_trip(const std::string& id) const;
  std::optional<PoleIdx> find_pole(const std::string& id) const;
  std::optional<LocationIdx> find_location(const std::string& id) const;

 private:
  std::size_t cell(LocationIdx a, LocationIdx b) const {
    return static_cast<std::size_t>(a) * data_.locations.size() + b;
  }

  InstanceData data_;
  std::vector<ModelIdx> vehicle_model_;
  std::vector<LocationIdx> trip_origin_;
  std::vector<LocationIdx> trip_dest_;
  std::vector<LocationIdx> pole_location_;
  std::vector<double> trip_energy_;
  std::vector<double> pole_power_;
  std::vector<Seconds> deadhead_duration_;
  std::vector<double> deadhead_energy_;
  std::unordered_map<std::string, VehicleIdx> vehicle_ix_;
  std::unordered_map<std::string, TripIdx> trip_ix_;
  std::unordered_map<std::string, PoleIdx> pole_ix_;
  std::unordered_map<std::string, LocationIdx> location_ix_;
};

/// D(from, to) by location id. Throws MissingDeadhead for absent pairs.
Seconds deadhead_duration(const Instance& instance, const std::string& from, const std::string& to);

}  // namespace fleetopt
