#include "fleetopt/feasibility.hpp"

#include <algorithm>
#include <map>

namespace fleetopt {

bool pair_feasible(const Instance& inst, Task x1, Task x2) {
  const TaskWindow a = window(inst, x1);
  const TaskWindow b = window(inst, x2);
  if (!inst.has_deadhead(a.destination, b.origin)) return false;
  return a.end + inst.deadhead_time(a.destination, b.origin) <= b.start;
}

BatteryProfile battery_profile(const Instance& inst, VehicleIdx v, std::span<const Task> schedule) {
  const SlotGrid& grid = inst.slots();
  const SlotIdx n = grid.count();
  BatteryProfile p;
  p.used_kwh.assign(n, 0.0);
  p.charged_kwh.assign(n, 0.0);

  const TaskWindow* prev = nullptr;
  TaskWindow prev_storage;
  for (const Task& x : schedule) {
    const TaskWindow w = window(inst, x);
    if (prev != nullptr) {
      // The deadhead into x is needed once x starts.
      p.used_kwh[grid.slot_of(w.start)] += inst.deadhead_energy(v, prev->destination, w.origin);
    }
    if (x.is_trip()) {
      p.used_kwh[grid.slot_of(w.end)] += inst.trip_energy(v, x.index);
    } else {
      p.charged_kwh[grid.slot_of(w.end)] += inst.pole_power(x.index, v);
    }
    prev_storage = w;
    prev = &prev_storage;
  }

  double used = 0.0;
  double charged = inst.initial_charge(v);
  for (SlotIdx s = 0; s < n; ++s) {
    used += p.used_kwh[s];
    charged += p.charged_kwh[s];
    p.used_kwh[s] = used;
    p.charged_kwh[s] = charged;
  }
  return p;
}

BatteryProfile battery_profile(const Instance& inst, const Solution& sol, VehicleIdx v) {
  std::vector<Task> tasks;
  for (const auto& a : sol.trips) {
    if (a.vehicle == v) tasks.push_back(Task::for_trip(a.trip));
  }
  for (const auto& c : sol.charges) {
    if (c.vehicle == v) tasks.push_back(Task::for_charge(c.pole, c.slot));
  }
  sort_schedule(inst, tasks);
  return battery_profile(inst, v, tasks);
}

std::optional<SlotIdx> first_underflow(const BatteryProfile& p, double floor) {
  for (SlotIdx s = 0; s < p.size(); ++s) {
    if (p.level(s) < floor) return s;
  }
  return std::nullopt;
}

std::optional<SlotIdx> first_overflow(const BatteryProfile& p, double capacity) {
  for (SlotIdx s = 0; s < p.size(); ++s) {
    if (p.level(s) > capacity + kBatteryEpsilon) return s;
  }
  return std::nullopt;
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::unassigned_trip: return "unassigned_trip";
    case ViolationKind::double_assigned_trip: return "double_assigned_trip";
    case ViolationKind::slot_conflict: return "slot_conflict";
    case ViolationKind::time_infeasible_pair: return "time_infeasible_pair";
    case ViolationKind::battery_underflow: return "battery_underflow";
    case ViolationKind::battery_overflow: return "battery_overflow";
    case ViolationKind::liquid_vehicle_charging: return "liquid_vehicle_charging";
  }
  return "unknown";
}

ValidationReport validate_solution(const Instance& inst, const Solution& sol) {
  ValidationReport report;

  std::vector<std::vector<VehicleIdx>> owners(inst.trip_count());
  for (const auto& a : sol.trips) owners[a.trip].push_back(a.vehicle);
  for (TripIdx t = 0; t < inst.trip_count(); ++t) {
    auto& vs = owners[t];
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    if (vs.empty()) {
      report.push_back({ViolationKind::unassigned_trip, std::nullopt, t, std::nullopt, std::nullopt,
                        "trip " + inst.trip(t).id + " has no vehicle"});
    } else if (vs.size() > 1) {
      std::string who;
      for (VehicleIdx v : vs) who += (who.empty() ? "" : ",") + inst.vehicle(v).id;
      report.push_back({ViolationKind::double_assigned_trip, std::nullopt, t, std::nullopt, std::nullopt,
                        "trip " + inst.trip(t).id + " served by " + who});
    }
  }

  std::map<std::pair<PoleIdx, SlotIdx>, std::vector<VehicleIdx>> slot_users;
  for (const auto& c : sol.charges) {
    slot_users[{c.pole, c.slot}].push_back(c.vehicle);
    if (!inst.is_electric(c.vehicle)) {
      report.push_back({ViolationKind::liquid_vehicle_charging, c.vehicle, std::nullopt, c.pole, c.slot,
                        "vehicle " + inst.vehicle(c.vehicle).id + " cannot charge"});
    }
  }
  for (const auto& [key, users] : slot_users) {
    if (users.size() > 1) {
      report.push_back({ViolationKind::slot_conflict, std::nullopt, std::nullopt, key.first, key.second,
                        "charging slot " + inst.pole(key.first).id + "@" + std::to_string(key.second) + " used " +
                            std::to_string(users.size()) + " times"});
    }
  }

  const Schedules scheds = schedules_of(inst, sol);
  for (VehicleIdx v = 0; v < inst.vehicle_count(); ++v) {
    const auto& tasks = scheds[v];
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      for (std::size_t j = i + 1; j < tasks.size(); ++j) {
        if (!pair_feasible(inst, tasks[i], tasks[j])) {
          Violation viol{ViolationKind::time_infeasible_pair, v, std::nullopt, std::nullopt, std::nullopt,
                         task_label(inst, tasks[i]) + " -> " + task_label(inst, tasks[j]) + " on " +
                             inst.vehicle(v).id};
          if (tasks[j].is_trip()) viol.trip = tasks[j].index;
          report.push_back(std::move(viol));
        }
      }
    }
    if (!inst.is_electric(v)) continue;
    const BatteryProfile p = battery_profile(inst, v, tasks);
    if (auto s = first_underflow(p, kBatteryEpsilon)) {
      report.push_back({ViolationKind::battery_underflow, v, std::nullopt, std::nullopt, *s,
                        "level " + std::to_string(p.level(*s)) + " kWh"});
    }
    if (auto s = first_overflow(p, inst.capacity(v))) {
      report.push_back({ViolationKind::battery_overflow, v, std::nullopt, std::nullopt, *s,
                        "level " + std::to_string(p.level(*s)) + " kWh"});
    }
  }
  return report;
}

bool has_violation(const ValidationReport& report, ViolationKind kind) {
  return std::any_of(report.begin(), report.end(), [&](const Violation& v) { return v.kind == kind; });
}

double schedule_energy(const Instance& inst, VehicleIdx v, std::span<const Task> schedule) {
  double e = 0.0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i].is_trip()) e += inst.trip_energy(v, schedule[i].index);
    if (i > 0) {
      e += inst.deadhead_energy(v, window(inst, schedule[i - 1]).destination, window(inst, schedule[i]).origin);
    }
  }
  return e;
}

double solution_cost(const Instance& inst, const Schedules& schedules) {
  double cost = 0.0;
  for (VehicleIdx v = 0; v < schedules.size(); ++v) {
    if (!schedules[v].empty()) cost += inst.cost_weight(v) * schedule_energy(inst, v, schedules[v]);
  }
  return cost;
}

double solution_cost(const Instance& inst, const Solution& sol) {
  return solution_cost(inst, schedules_of(inst, sol));
}

}  // namespace fleetopt
