#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fleetopt/instance.hpp"

namespace fleetopt {

enum class TaskKind : std::uint8_t { trip = 0, charge = 1 };

/// A transit trip or a charging slot (pole, slot). Both occupy a vehicle for a
/// fixed time window between two locations.
struct Task {
  TaskKind kind = TaskKind::trip;
  std::uint32_t index = 0;  // trip index or pole index
  SlotIdx slot = 0;         // charging slots only

  static Task for_trip(TripIdx t) { return {TaskKind::trip, t, 0}; }
  static Task for_charge(PoleIdx p, SlotIdx s) { return {TaskKind::charge, p, s}; }

  bool is_trip() const { return kind == TaskKind::trip; }
  bool operator==(const Task&) const = default;
};

struct TaskWindow {
  Seconds start = 0;
  Seconds end = 0;
  LocationIdx origin = 0;
  LocationIdx destination = 0;
};

inline TaskWindow window(const Instance& inst, Task x) {
  if (x.is_trip()) {
    const auto& t = inst.trip(x.index);
    return {t.start_s, t.end_s, inst.trip_origin(x.index), inst.trip_destination(x.index)};
  }
  const auto loc = inst.pole_location(x.index);
  return {inst.slots().slot_start(x.slot), inst.slots().slot_end(x.slot), loc, loc};
}

/// Chronological order used everywhere a vehicle's tasks are sequenced:
/// start time, then trips before charging slots, then id order.
inline bool task_before(const Instance& inst, Task a, Task b) {
  const Seconds sa = window(inst, a).start;
  const Seconds sb = window(inst, b).start;
  if (sa != sb) return sa < sb;
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.index != b.index) return a.index < b.index;
  return a.slot < b.slot;
}

std::string task_label(const Instance& inst, Task x);

struct TripAssignment {
  VehicleIdx vehicle = 0;
  TripIdx trip = 0;
  auto operator<=>(const TripAssignment&) const = default;
};

struct ChargeAssignment {
  VehicleIdx vehicle = 0;
  PoleIdx pole = 0;
  SlotIdx slot = 0;
  auto operator<=>(const ChargeAssignment&) const = default;
};

/// Set of <vehicle, trip> and <vehicle, (pole, slot)> assignments.
struct Solution {
  std::vector<TripAssignment> trips;
  std::vector<ChargeAssignment> charges;

  /// Sorts both lists and removes exact duplicates (set semantics).
  void normalize();
  std::size_t size() const { return trips.size() + charges.size(); }
  bool operator==(const Solution&) const = default;
};

/// Per-vehicle task lists in chronological order.
using Schedules = std::vector<std::vector<Task>>;

Schedules schedules_of(const Instance& inst, const Solution& sol);
void sort_schedule(const Instance& inst, std::vector<Task>& tasks);
/// Inverse of schedules_of.
Solution solution_from(const Schedules& schedules);

}  // namespace fleetopt
