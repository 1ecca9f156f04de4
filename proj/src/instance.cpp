#include "fleetopt/instance.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fleetopt {

const char* to_string(VehicleKind kind) {
  return kind == VehicleKind::electric ? "electric" : "liquid_fuel";
}

VehicleKind vehicle_kind_from_string(const std::string& s) {
  if (s == "electric") return VehicleKind::electric;
  if (s == "liquid_fuel") return VehicleKind::liquid_fuel;
  throw ValidationError("unknown vehicle kind '" + s + "'");
}

SlotIdx SlotGrid::slot_of(Seconds t) const {
  const Seconds rel = t - day_start_s;
  SlotIdx k = 0;
  if (rel > 0) k = static_cast<SlotIdx>((rel + slot_length_s - 1) / slot_length_s) - 1;
  return std::clamp<SlotIdx>(k, 0, count() - 1);
}

namespace {

template <typename T>
void sort_and_check_unique(std::vector<T>& items, const char* what) {
  std::sort(items.begin(), items.end(), [](const T& a, const T& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (items[i].id == items[i - 1].id) {
      throw ValidationError(std::string("duplicate ") + what + " id '" + items[i].id + "'");
    }
  }
}

template <typename T, typename Idx>
std::unordered_map<std::string, Idx> index_by_id(const std::vector<T>& items) {
  std::unordered_map<std::string, Idx> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) out.emplace(items[i].id, static_cast<Idx>(i));
  return out;
}

void require_finite_nonneg(double x, const std::string& what) {
  if (!std::isfinite(x) || x < 0) throw ValidationError(what + " must be finite and non-negative");
}

}  // namespace

Instance::Instance(InstanceData data) : data_(std::move(data)) {
  sort_and_check_unique(data_.models, "model");
  sort_and_check_unique(data_.vehicles, "vehicle");
  sort_and_check_unique(data_.locations, "location");
  sort_and_check_unique(data_.trips, "trip");
  sort_and_check_unique(data_.charging_poles, "charging pole");

  if (data_.vehicles.empty()) throw ValidationError("instance has no vehicles");
  if (data_.trips.empty()) throw ValidationError("instance has no trips");

  const auto& grid = data_.slot_grid;
  if (grid.slot_length_s <= 0) throw ValidationError("slot_length_s must be positive");
  if (grid.day_end_s <= grid.day_start_s) throw ValidationError("slot grid day_end_s must exceed day_start_s");
  if ((grid.day_end_s - grid.day_start_s) % grid.slot_length_s != 0) {
    throw ValidationError("slot grid span is not divisible by slot_length_s");
  }
  if (!std::isfinite(data_.costs.k_gas) || !std::isfinite(data_.costs.k_elec) || data_.costs.k_gas < 0 ||
      data_.costs.k_elec < 0) {
    throw ValidationError("cost weights must be finite and non-negative");
  }

  const auto model_ix = index_by_id<VehicleModelSpec, ModelIdx>(data_.models);
  location_ix_ = index_by_id<Location, LocationIdx>(data_.locations);
  vehicle_ix_ = index_by_id<Vehicle, VehicleIdx>(data_.vehicles);
  trip_ix_ = index_by_id<TransitTrip, TripIdx>(data_.trips);
  pole_ix_ = index_by_id<ChargingPole, PoleIdx>(data_.charging_poles);

  for (const auto& m : data_.models) {
    require_finite_nonneg(m.battery_capacity_kwh, "battery capacity of model '" + m.id + "'");
    if (m.kind == VehicleKind::electric && m.battery_capacity_kwh <= 0) {
      throw ValidationError("electric model '" + m.id + "' needs a positive battery capacity");
    }
  }
  for (const auto& l : data_.locations) {
    if (!(l.lat >= -90 && l.lat <= 90 && l.lon >= -180 && l.lon <= 180)) {
      throw ValidationError("location '" + l.id + "' has out-of-range coordinates");
    }
  }

  const auto lookup_location = [&](const std::string& id, const std::string& who) {
    auto it = location_ix_.find(id);
    if (it == location_ix_.end()) throw ValidationError(who + " references unknown location '" + id + "'");
    return it->second;
  };

  vehicle_model_.reserve(data_.vehicles.size());
  for (const auto& v : data_.vehicles) {
    auto it = model_ix.find(v.model);
    if (it == model_ix.end()) throw ValidationError("vehicle '" + v.id + "' references unknown model '" + v.model + "'");
    const auto& m = data_.models[it->second];
    require_finite_nonneg(v.initial_charge_kwh, "initial charge of vehicle '" + v.id + "'");
    if (m.kind == VehicleKind::liquid_fuel && v.initial_charge_kwh != 0) {
      throw ValidationError("liquid-fuel vehicle '" + v.id + "' must have zero initial charge");
    }
    if (v.initial_charge_kwh > m.battery_capacity_kwh) {
      throw ValidationError("vehicle '" + v.id + "' initial charge exceeds battery capacity");
    }
    vehicle_model_.push_back(it->second);
  }

  for (const auto& t : data_.trips) {
    if (t.start_s >= t.end_s) throw ValidationError("trip '" + t.id + "' must start before it ends");
    trip_origin_.push_back(lookup_location(t.origin, "trip '" + t.id + "'"));
    trip_dest_.push_back(lookup_location(t.destination, "trip '" + t.id + "'"));
  }

  const std::size_t nm = data_.models.size();
  pole_power_.assign(data_.charging_poles.size() * nm, 0.0);
  for (std::size_t p = 0; p < data_.charging_poles.size(); ++p) {
    const auto& pole = data_.charging_poles[p];
    pole_location_.push_back(lookup_location(pole.location, "charging pole '" + pole.id + "'"));
    for (const auto& [model, kwh] : pole.power_per_slot_kwh) {
      auto it = model_ix.find(model);
      if (it == model_ix.end()) {
        throw ValidationError("charging pole '" + pole.id + "' references unknown model '" + model + "'");
      }
      require_finite_nonneg(kwh, "power of pole '" + pole.id + "'");
      pole_power_[p * nm + it->second] = kwh;
    }
    for (const auto& m : data_.models) {
      if (m.kind == VehicleKind::electric && !pole.power_per_slot_kwh.contains(m.id)) {
        throw ValidationError("charging pole '" + pole.id + "' has no power for electric model '" + m.id + "'");
      }
    }
  }

  trip_energy_.assign(data_.trips.size() * nm, 0.0);
  std::vector<char> seen(trip_energy_.size(), 0);
  for (const auto& [key, kwh] : data_.trip_energy) {
    auto t = trip_ix_.find(key.first);
    if (t == trip_ix_.end()) throw ValidationError("trip energy references unknown trip '" + key.first + "'");
    auto m = model_ix.find(key.second);
    if (m == model_ix.end()) throw ValidationError("trip energy references unknown model '" + key.second + "'");
    require_finite_nonneg(kwh, "energy of trip '" + key.first + "'");
    trip_energy_[t->second * nm + m->second] = kwh;
    seen[t->second * nm + m->second] = 1;
  }
  for (std::size_t t = 0; t < data_.trips.size(); ++t) {
    for (std::size_t m = 0; m < nm; ++m) {
      if (!seen[t * nm + m]) {
        throw ValidationError("trip energy missing for trip '" + data_.trips[t].id + "' and model '" +
                              data_.models[m].id + "'");
      }
    }
  }

  const std::size_t nl = data_.locations.size();
  deadhead_duration_.assign(nl * nl, -1);
  deadhead_energy_.assign(nl * nl * nm, 0.0);
  for (std::size_t l = 0; l < nl; ++l) deadhead_duration_[l * nl + l] = 0;
  for (const auto& [key, entry] : data_.deadhead) {
    const auto from = lookup_location(key.first, "deadhead entry");
    const auto to = lookup_location(key.second, "deadhead entry");
    if (entry.duration_s < 0) throw ValidationError("deadhead " + key.first + " -> " + key.second + " has negative duration");
    if (from == to && entry.duration_s != 0) {
      throw ValidationError("deadhead " + key.first + " -> " + key.second + " must be zero");
    }
    deadhead_duration_[cell(from, to)] = entry.duration_s;
    for (const auto& [model, kwh] : entry.energy_kwh) {
      auto m = model_ix.find(model);
      if (m == model_ix.end()) throw ValidationError("deadhead entry references unknown model '" + model + "'");
      require_finite_nonneg(kwh, "deadhead energy " + key.first + " -> " + key.second);
      if (from == to && kwh != 0) throw ValidationError("deadhead " + key.first + " -> " + key.second + " must be zero");
      deadhead_energy_[cell(from, to) * nm + m->second] = kwh;
    }
  }
}

namespace {
template <typename Idx>
std::optional<Idx> find_in(const std::unordered_map<std::string, Idx>& m, const std::string& id) {
  auto it = m.find(id);
  if (it == m.end()) return std::nullopt;
  return it->second;
}
}  // namespace

std::optional<VehicleIdx> Instance::find_vehicle(const std::string& id) const { return find_in(vehicle_ix_, id); }
std::optional<TripIdx> Instance::find_trip(const std::string& id) const { return find_in(trip_ix_, id); }
std::optional<PoleIdx> Instance::find_pole(const std::string& id) const { return find_in(pole_ix_, id); }
std::optional<LocationIdx> Instance::find_location(const std::string& id) const { return find_in(location_ix_, id); }

Seconds deadhead_duration(const Instance& instance, const std::string& from, const std::string& to) {
  const auto a = instance.find_location(from);
  const auto b = instance.find_location(to);
  if (!a || !b || !instance.has_deadhead(*a, *b)) throw MissingDeadhead(from, to);
  return instance.deadhead_time(*a, *b);
}

}  // namespace fleetopt
