#include "fleetopt/greedy.hpp"

#include <algorithm>

namespace fleetopt {

PartialSolution::PartialSolution(const Instance& inst)
    : schedules(inst.vehicle_count()),
      trip_assigned(inst.trip_count(), 0),
      slot_used(inst.pole_count() * static_cast<std::size_t>(inst.slot_count()), 0) {}

PartialSolution::PartialSolution(const Instance& inst, const Solution& sol) : PartialSolution(inst) {
  schedules = schedules_of(inst, sol);
  for (const auto& a : sol.trips) trip_assigned[a.trip] = 1;
  for (const auto& c : sol.charges) used(inst, c.pole, c.slot) = 1;
}

std::optional<CostLedger::Entry> CostLedger::argmin() const {
  std::optional<Entry> best;
  const std::size_t vehicles = trips_ == 0 ? 0 : cost_.size() / trips_;
  for (VehicleIdx v = 0; v < vehicles; ++v) {
    for (TripIdx t = 0; t < trips_; ++t) {
      const double c = at(v, t);
      if (c == kInfiniteCost) continue;
      if (!best || c < best->cost) best = Entry{v, t, c};
    }
  }
  return best;
}

std::size_t insertion_point(const Instance& inst, const std::vector<Task>& schedule, Task x) {
  const auto it = std::lower_bound(schedule.begin(), schedule.end(), x,
                                   [&](Task a, Task b) { return task_before(inst, a, b); });
  return static_cast<std::size_t>(it - schedule.begin());
}

bool fits_in_schedule(const Instance& inst, const std::vector<Task>& schedule, Task x) {
  const std::size_t pos = insertion_point(inst, schedule, x);
  for (std::size_t i = 0; i < pos; ++i) {
    if (!pair_feasible(inst, schedule[i], x)) return false;
  }
  for (std::size_t i = pos; i < schedule.size(); ++i) {
    if (schedule[i] == x || !pair_feasible(inst, x, schedule[i])) return false;
  }
  return true;
}

double raw_biased_cost(const Instance& inst, const std::vector<Task>& schedule, VehicleIdx v, Task x, double alpha) {
  const TaskWindow w = window(inst, x);
  double energy = x.is_trip() ? inst.trip_energy(v, x.index) : 0.0;
  double layover = 0.0;
  const std::size_t pos = insertion_point(inst, schedule, x);
  if (pos > 0) {
    const TaskWindow prev = window(inst, schedule[pos - 1]);
    energy += inst.deadhead_energy(v, prev.destination, w.origin);
    layover += static_cast<double>(w.start - prev.end);
  }
  if (pos < schedule.size()) {
    const TaskWindow next = window(inst, schedule[pos]);
    energy += inst.deadhead_energy(v, w.destination, next.origin);
    layover += static_cast<double>(next.start - w.end);
  }
  return inst.cost_weight(v) * energy + alpha * layover;
}

bool repair_charging(const Instance& inst, VehicleIdx v, std::vector<Task>& schedule, std::vector<char>& slot_used,
                     const GreedyConfig& config) {
  if (!inst.is_electric(v)) return true;
  const SlotIdx slots = inst.slot_count();
  const double floor = config.floor();
  for (;;) {
    const BatteryProfile profile = battery_profile(inst, v, schedule);
    const auto dip = first_underflow(profile, floor);
    if (!dip) return true;

    std::optional<Task> best;
    double best_score = kInfiniteCost;
    std::vector<Task> trial;
    for (SlotIdx k = 0; k <= *dip; ++k) {
      for (PoleIdx p = 0; p < inst.pole_count(); ++p) {
        if (slot_used[static_cast<std::size_t>(p) * slots + k] || inst.pole_power(p, v) <= 0.0) continue;
        const Task x = Task::for_charge(p, k);
        if (!fits_in_schedule(inst, schedule, x)) continue;
        const std::size_t pos = insertion_point(inst, schedule, x);
        trial = schedule;
        trial.insert(trial.begin() + static_cast<std::ptrdiff_t>(pos), x);
        const BatteryProfile after = battery_profile(inst, v, trial);
        if (after.level(*dip) <= profile.level(*dip) + 1e-12) continue;
        if (first_overflow(after, inst.capacity(v))) continue;

        double score = raw_biased_cost(inst, schedule, v, x, config.alpha);
        if (pos > 0 && pos < schedule.size()) {
          score -= inst.cost_weight(v) * inst.deadhead_energy(v, window(inst, schedule[pos - 1]).destination,
                                                              window(inst, schedule[pos]).origin);
        }
        if (score < best_score) {
          best_score = score;
          best = x;
        }
      }
    }
    if (!best) return false;
    schedule.insert(schedule.begin() + static_cast<std::ptrdiff_t>(insertion_point(inst, schedule, *best)), *best);
    slot_used[static_cast<std::size_t>(best->index) * slots + best->slot] = 1;
  }
}

double biased_cost(const Instance& inst, const PartialSolution& partial, VehicleIdx v, Task x,
                   const GreedyConfig& config) {
  const auto& schedule = partial.schedules[v];
  if (!fits_in_schedule(inst, schedule, x)) return kInfiniteCost;
  const double cost = raw_biased_cost(inst, schedule, v, x, config.alpha);
  if (inst.is_electric(v)) {
    std::vector<Task> trial = schedule;
    trial.insert(trial.begin() + static_cast<std::ptrdiff_t>(insertion_point(inst, schedule, x)), x);
    if (first_underflow(battery_profile(inst, v, trial), config.floor())) {
      std::vector<char> used = partial.slot_used;
      if (!repair_charging(inst, v, trial, used, config)) return kInfiniteCost;
    }
  }
  return cost;
}

void fill_row(const Instance& inst, const PartialSolution& partial, CostLedger& ledger, VehicleIdx v,
              const GreedyConfig& config) {
  for (TripIdx t = 0; t < inst.trip_count(); ++t) {
    ledger.at(v, t) = partial.trip_assigned[t] ? kInfiniteCost : biased_cost(inst, partial, v, Task::for_trip(t), config);
  }
}

namespace {

void fill_rows(const Instance& inst, const PartialSolution& partial, CostLedger& ledger,
               const std::vector<VehicleIdx>& rows, const GreedyConfig& config, Execution exec) {
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
  if (exec == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) fill_row(inst, partial, ledger, rows[i], config);
    return;
  }
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) fill_row(inst, partial, ledger, rows[i], config);
}

}  // namespace

void update_after_assign(const Instance& inst, PartialSolution& partial, CostLedger& ledger, VehicleIdx v,
                         Task task, const GreedyConfig& config, Execution exec) {
  auto& schedule = partial.schedules[v];
  const std::size_t before = schedule.size();
  if (!repair_charging(inst, v, schedule, partial.slot_used, config)) {
    throw ChargingRepairFailed(v, "no charging insertion keeps " + inst.vehicle(v).id + " above the battery floor");
  }
  if (task.is_trip()) {
    for (VehicleIdx u = 0; u < inst.vehicle_count(); ++u) ledger.at(u, task.index) = kInfiniteCost;
  }

  std::vector<VehicleIdx> rows{v};
  if (schedule.size() != before) {
    // Newly occupied slots can change other electric vehicles' repairs.
    for (VehicleIdx u = 0; u < inst.vehicle_count(); ++u) {
      if (u != v && inst.is_electric(u)) rows.push_back(u);
    }
  }
  fill_rows(inst, partial, ledger, rows, config, exec);
}

Solution greedy_assign(const Instance& inst, const GreedyConfig& config, Execution exec) {
  PartialSolution partial(inst);
  CostLedger ledger(inst.vehicle_count(), inst.trip_count());
  std::vector<VehicleIdx> all(inst.vehicle_count());
  for (VehicleIdx v = 0; v < all.size(); ++v) all[v] = v;
  fill_rows(inst, partial, ledger, all, config, exec);

  for (std::size_t n = 0; n < inst.trip_count(); ++n) {
    const auto pick = ledger.argmin();
    if (!pick) {
      std::vector<Task> open;
      for (TripIdx t = 0; t < inst.trip_count(); ++t) {
        if (!partial.trip_assigned[t]) open.push_back(Task::for_trip(t));
      }
      sort_schedule(inst, open);
      const TripIdx t = open.front().index;
      throw GreedyInfeasible(t, "no vehicle can serve trip " + inst.trip(t).id);
    }
    const Task x = Task::for_trip(pick->trip);
    auto& schedule = partial.schedules[pick->vehicle];
    schedule.insert(schedule.begin() + static_cast<std::ptrdiff_t>(insertion_point(inst, schedule, x)), x);
    partial.trip_assigned[pick->trip] = 1;
    try {
      update_after_assign(inst, partial, ledger, pick->vehicle, x, config, exec);
    } catch (const ChargingRepairFailed& e) {
      throw GreedyInfeasible(pick->trip, e.what());
    }
  }
  // Vehicles never picked still need a valid battery (initial charge below the floor).
  for (VehicleIdx v = 0; v < inst.vehicle_count(); ++v) {
    if (!repair_charging(inst, v, partial.schedules[v], partial.slot_used, config)) {
      throw ChargingRepairFailed(v, "no charging insertion keeps " + inst.vehicle(v).id + " above the battery floor");
    }
  }
  return partial.to_solution();
}

}  // namespace fleetopt
