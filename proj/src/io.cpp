#include "fleetopt/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace fleetopt {

using nlohmann::json;

double round6(double x) {
  const double r = std::round(x * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // no "-0.0" in output
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

json instance_to_json(const InstanceData& d) {
  json j;
  j["models"] = json::array();
  for (const auto& m : d.models) {
    j["models"].push_back({{"id", m.id}, {"kind", to_string(m.kind)}, {"battery_capacity_kwh", m.battery_capacity_kwh}});
  }
  j["vehicles"] = json::array();
  for (const auto& v : d.vehicles) {
    j["vehicles"].push_back({{"id", v.id}, {"model", v.model}, {"initial_charge_kwh", v.initial_charge_kwh}});
  }
  j["locations"] = json::array();
  for (const auto& l : d.locations) j["locations"].push_back({{"id", l.id}, {"lat", l.lat}, {"lon", l.lon}});
  j["trips"] = json::array();
  for (const auto& t : d.trips) {
    j["trips"].push_back({{"id", t.id},
                          {"origin", t.origin},
                          {"destination", t.destination},
                          {"start_s", t.start_s},
                          {"end_s", t.end_s}});
  }
  j["charging_poles"] = json::array();
  for (const auto& p : d.charging_poles) {
    j["charging_poles"].push_back(
        {{"id", p.id}, {"location", p.location}, {"power_per_slot_kwh", json(p.power_per_slot_kwh)}});
  }
  j["slot_grid"] = {{"day_start_s", d.slot_grid.day_start_s},
                    {"day_end_s", d.slot_grid.day_end_s},
                    {"slot_length_s", d.slot_grid.slot_length_s}};
  j["deadhead"] = json::array();
  for (const auto& [key, e] : d.deadhead) {
    j["deadhead"].push_back(
        {{"from", key.first}, {"to", key.second}, {"duration_s", e.duration_s}, {"energy_kwh", json(e.energy_kwh)}});
  }
  j["trip_energy"] = json::array();
  for (const auto& [key, kwh] : d.trip_energy) {
    j["trip_energy"].push_back({{"trip", key.first}, {"model", key.second}, {"energy_kwh", kwh}});
  }
  j["costs"] = {{"k_gas", d.costs.k_gas}, {"k_elec", d.costs.k_elec}};
  return j;
}

InstanceData instance_from_json(const json& j) {
  InstanceData d;
  try {
    for (const auto& m : j.at("models")) {
      VehicleModelSpec spec;
      spec.id = m.at("id").get<std::string>();
      spec.kind = vehicle_kind_from_string(m.at("kind").get<std::string>());
      spec.battery_capacity_kwh = m.value("battery_capacity_kwh", 0.0);
      d.models.push_back(std::move(spec));
    }
    for (const auto& v : j.at("vehicles")) {
      d.vehicles.push_back({v.at("id").get<std::string>(), v.at("model").get<std::string>(),
                            v.value("initial_charge_kwh", 0.0)});
    }
    for (const auto& l : j.at("locations")) {
      d.locations.push_back({l.at("id").get<std::string>(), l.at("lat").get<double>(), l.at("lon").get<double>()});
    }
    for (const auto& t : j.at("trips")) {
      d.trips.push_back({t.at("id").get<std::string>(), t.at("origin").get<std::string>(),
                         t.at("destination").get<std::string>(), t.at("start_s").get<Seconds>(),
                         t.at("end_s").get<Seconds>()});
    }
    for (const auto& p : j.value("charging_poles", json::array())) {
      d.charging_poles.push_back({p.at("id").get<std::string>(), p.at("location").get<std::string>(),
                                  p.at("power_per_slot_kwh").get<std::map<std::string, double>>()});
    }
    if (j.contains("slot_grid")) {
      const auto& g = j["slot_grid"];
      d.slot_grid = {g.at("day_start_s").get<Seconds>(), g.at("day_end_s").get<Seconds>(),
                     g.at("slot_length_s").get<Seconds>()};
    }
    for (const auto& e : j.at("deadhead")) {
      LocationPair key{e.at("from").get<std::string>(), e.at("to").get<std::string>()};
      DeadheadEntry entry{e.at("duration_s").get<Seconds>(),
                          e.value("energy_kwh", json::object()).get<std::map<std::string, double>>()};
      if (!d.deadhead.emplace(key, std::move(entry)).second) {
        throw ParseError("duplicate deadhead entry " + key.first + " -> " + key.second);
      }
    }
    for (const auto& e : j.at("trip_energy")) {
      TripModelPair key{e.at("trip").get<std::string>(), e.at("model").get<std::string>()};
      if (!d.trip_energy.emplace(key, e.at("energy_kwh").get<double>()).second) {
        throw ParseError("duplicate trip energy entry " + key.first + "/" + key.second);
      }
    }
    const auto& c = j.at("costs");
    d.costs = {c.at("k_gas").get<double>(), c.at("k_elec").get<double>()};
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed instance: ") + e.what());
  }
  return d;
}

Instance load_instance(const std::filesystem::path& path) { return Instance(instance_from_json(read_json_file(path))); }

std::string dump_instance(const InstanceData& data) { return instance_to_json(data).dump(1) + "\n"; }

void save_instance(const InstanceData& data, const std::filesystem::path& path) {
  write_text_file(path, dump_instance(data));
}

json solution_to_json(const Instance& inst, const Solution& sol, const SolutionMeta& meta) {
  json j;
  j["trip_assignments"] = json::array();
  for (const auto& a : sol.trips) {
    j["trip_assignments"].push_back({{"vehicle", inst.vehicle(a.vehicle).id}, {"trip", inst.trip(a.trip).id}});
  }
  j["charging_assignments"] = json::array();
  for (const auto& c : sol.charges) {
    j["charging_assignments"].push_back(
        {{"vehicle", inst.vehicle(c.vehicle).id}, {"pole", inst.pole(c.pole).id}, {"slot", c.slot}});
  }
  j["cost"] = round6(solution_cost(inst, sol));
  j["algorithm"] = meta.algorithm;
  j["seed"] = meta.seed ? json(*meta.seed) : json(nullptr);
  j["wall_time_ms"] = round6(meta.wall_time_ms);
  if (meta.certificate) j["certificate"] = *meta.certificate;
  return j;
}

Solution solution_from_json(const Instance& inst, const json& j) {
  Solution sol;
  const auto need = [](auto opt, const std::string& what, const std::string& id) {
    if (!opt) throw ParseError("solution references unknown " + what + " '" + id + "'");
    return *opt;
  };
  try {
    for (const auto& a : j.at("trip_assignments")) {
      const auto vid = a.at("vehicle").get<std::string>();
      const auto tid = a.at("trip").get<std::string>();
      sol.trips.push_back({need(inst.find_vehicle(vid), "vehicle", vid), need(inst.find_trip(tid), "trip", tid)});
    }
    for (const auto& c : j.value("charging_assignments", json::array())) {
      const auto vid = c.at("vehicle").get<std::string>();
      const auto pid = c.at("pole").get<std::string>();
      const auto slot = c.at("slot").get<SlotIdx>();
      if (slot < 0 || slot >= inst.slot_count()) throw ParseError("charging slot index out of range");
      sol.charges.push_back({need(inst.find_vehicle(vid), "vehicle", vid), need(inst.find_pole(pid), "pole", pid), slot});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed solution: ") + e.what());
  }
  sol.normalize();
  return sol;
}

Solution load_solution(const Instance& inst, const std::filesystem::path& path) {
  return solution_from_json(inst, read_json_file(path));
}

json report_to_json(const Instance& inst, const ValidationReport& report) {
  json out = json::array();
  for (const auto& v : report) {
    json e;
    e["kind"] = to_string(v.kind);
    if (v.vehicle) e["vehicle"] = inst.vehicle(*v.vehicle).id;
    if (v.trip) e["trip"] = inst.trip(*v.trip).id;
    if (v.pole) e["pole"] = inst.pole(*v.pole).id;
    if (v.slot) e["slot"] = *v.slot;
    e["detail"] = v.detail;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace fleetopt
