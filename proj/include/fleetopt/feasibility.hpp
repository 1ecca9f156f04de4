#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fleetopt/instance.hpp"
#include "fleetopt/solution.hpp"

namespace fleetopt {

/// The strict lower battery bound 0 < level is enforced as level >= this.
inline constexpr double kBatteryEpsilon = 1e-9;

/// x1 then x2 on one vehicle: x1.end + D(x1.destination, x2.origin) <= x2.start.
/// Caller orders the pair so that x1 does not start after x2.
bool pair_feasible(const Instance& inst, Task x1, Task x2);

/// Cumulative energy ledger of one electric vehicle, indexed by slot.
struct BatteryProfile {
  std::vector<double> used_kwh;     // e(A, v, s), deadheads included
  std::vector<double> charged_kwh;  // r(A, v, s), initial charge included

  double level(SlotIdx s) const { return charged_kwh[s] - used_kwh[s]; }
  SlotIdx size() const { return static_cast<SlotIdx>(used_kwh.size()); }
};

BatteryProfile battery_profile(const Instance& inst, const Solution& sol, VehicleIdx v);
/// Same ledger for an already chronologically sorted task list of vehicle v.
BatteryProfile battery_profile(const Instance& inst, VehicleIdx v, std::span<const Task> schedule);

/// First slot whose level is below `floor`, or above capacity.
std::optional<SlotIdx> first_underflow(const BatteryProfile& p, double floor);
std::optional<SlotIdx> first_overflow(const BatteryProfile& p, double capacity);

enum class ViolationKind {
  unassigned_trip,
  double_assigned_trip,
  slot_conflict,
  time_infeasible_pair,
  battery_underflow,
  battery_overflow,
  liquid_vehicle_charging,
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::optional<VehicleIdx> vehicle;
  std::optional<TripIdx> trip;
  std::optional<PoleIdx> pole;
  std::optional<SlotIdx> slot;
  std::string detail;
};

using ValidationReport = std::vector<Violation>;

/// Every constraint violation of `sol`; empty iff it is complete and feasible.
ValidationReport validate_solution(const Instance& inst, const Solution& sol);

bool has_violation(const ValidationReport& report, ViolationKind kind);

/// Unweighted energy of a sorted schedule: trip energies plus the deadheads
/// between consecutive tasks.
double schedule_energy(const Instance& inst, VehicleIdx v, std::span<const Task> schedule);

/// Objective value: sum over vehicles of K^{M_v} times schedule_energy.
double solution_cost(const Instance& inst, const Solution& sol);
double solution_cost(const Instance& inst, const Schedules& schedules);

}  // namespace fleetopt
