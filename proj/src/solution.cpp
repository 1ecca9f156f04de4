#include "fleetopt/solution.hpp"

#include <algorithm>

namespace fleetopt {

std::string task_label(const Instance& inst, Task x) {
  if (x.is_trip()) return inst.trip(x.index).id;
  return inst.pole(x.index).id + "@" + std::to_string(x.slot);
}

void Solution::normalize() {
  std::sort(trips.begin(), trips.end());
  trips.erase(std::unique(trips.begin(), trips.end()), trips.end());
  std::sort(charges.begin(), charges.end());
  charges.erase(std::unique(charges.begin(), charges.end()), charges.end());
}

void sort_schedule(const Instance& inst, std::vector<Task>& tasks) {
  std::sort(tasks.begin(), tasks.end(), [&](Task a, Task b) { return task_before(inst, a, b); });
}

Schedules schedules_of(const Instance& inst, const Solution& sol) {
  Schedules out(inst.vehicle_count());
  for (const auto& a : sol.trips) out[a.vehicle].push_back(Task::for_trip(a.trip));
  for (const auto& c : sol.charges) out[c.vehicle].push_back(Task::for_charge(c.pole, c.slot));
  for (auto& s : out) sort_schedule(inst, s);
  return out;
}

Solution solution_from(const Schedules& schedules) {
  Solution sol;
  for (VehicleIdx v = 0; v < schedules.size(); ++v) {
    for (const Task& x : schedules[v]) {
      if (x.is_trip()) {
        sol.trips.push_back({v, x.index});
      } else {
        sol.charges.push_back({v, x.index, x.slot});
      }
    }
  }
  sol.normalize();
  return sol;
}

}  // namespace fleetopt
