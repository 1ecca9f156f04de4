#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fleetopt/feasibility.hpp"
#include "fleetopt/instance.hpp"
#include "fleetopt/solution.hpp"

namespace fleetopt {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

struct GreedyConfig {
  double alpha = 0.0005;                    // kWh per second of layover
  double charging_safety_floor_kwh = 0.0;   // added on top of kBatteryEpsilon

  double floor() const { return charging_safety_floor_kwh + kBatteryEpsilon; }
};

/// Ledger rows are filled with OpenMP unless `serial` is requested; both paths
/// produce identical values.
enum class Execution { parallel, serial };

class GreedyInfeasible : public std::runtime_error {
 public:
  GreedyInfeasible(TripIdx trip, const std::string& what) : std::runtime_error(what), trip(trip) {}
  TripIdx trip;
};

class ChargingRepairFailed : public std::runtime_error {
 public:
  ChargingRepairFailed(VehicleIdx vehicle, const std::string& what) : std::runtime_error(what), vehicle(vehicle) {}
  VehicleIdx vehicle;
};

/// Assignments made so far, kept as per-vehicle chronological task lists plus
/// trip and charging-slot occupancy.
struct PartialSolution {
  Schedules schedules;
  std::vector<char> trip_assigned;  // by trip index
  std::vector<char> slot_used;      // by pole * slot_count + slot

  explicit PartialSolution(const Instance& inst);
  PartialSolution(const Instance& inst, const Solution& sol);

  char& used(const Instance& inst, PoleIdx p, SlotIdx s) {
    return slot_used[static_cast<std::size_t>(p) * inst.slot_count() + s];
  }
  bool used(const Instance& inst, PoleIdx p, SlotIdx s) const {
    return slot_used[static_cast<std::size_t>(p) * inst.slot_count() + s] != 0;
  }
  Solution to_solution() const { return solution_from(schedules); }
};

/// E in the greedy algorithm: one biased cost per (vehicle, trip), +inf when
/// the assignment is infeasible or the trip is already taken.
class CostLedger {
 public:
  CostLedger(std::size_t vehicles, std::size_t trips) : trips_(trips), cost_(vehicles * trips, kInfiniteCost) {}

  double& at(VehicleIdx v, TripIdx t) { return cost_[static_cast<std::size_t>(v) * trips_ + t]; }
  double at(VehicleIdx v, TripIdx t) const { return cost_[static_cast<std::size_t>(v) * trips_ + t]; }

  struct Entry {
    VehicleIdx vehicle;
    TripIdx trip;
    double cost;
  };
  /// Lowest finite entry; ties go to the smaller vehicle, then trip index.
  std::optional<Entry> argmin() const;

 private:
  std::size_t trips_;
  std::vector<double> cost_;
};

/// Position at which `x` would be inserted into a chronological schedule.
std::size_t insertion_point(const Instance& inst, const std::vector<Task>& schedule, Task x);

/// True when x can join the schedule without breaking any pairwise time constraint.
bool fits_in_schedule(const Instance& inst, const std::vector<Task>& schedule, Task x);

/// Base energy (trips only) plus the deadheads to and from the nearest
/// neighbours, weighted by K^{M_v}, plus alpha times both layovers. Ignores
/// feasibility.
double raw_biased_cost(const Instance& inst, const std::vector<Task>& schedule, VehicleIdx v, Task x, double alpha);

/// raw_biased_cost, or +inf when x does not fit or (electric vehicles) the
/// schedule with x admits no charging repair.
double biased_cost(const Instance& inst, const PartialSolution& partial, VehicleIdx v, Task x,
                   const GreedyConfig& config);

/// Inserts charging slots into an electric vehicle's schedule until its
/// battery never drops below config.floor(). Marks the slots used. Returns
/// false (leaving a partially repaired schedule) when no insertion helps.
bool repair_charging(const Instance& inst, VehicleIdx v, std::vector<Task>& schedule, std::vector<char>& slot_used,
                     const GreedyConfig& config);

/// Recomputes every ledger entry of vehicle v.
void fill_row(const Instance& inst, const PartialSolution& partial, CostLedger& ledger, VehicleIdx v,
              const GreedyConfig& config);

/// Called after `task` has been committed to v: repairs v's charging
/// (throws ChargingRepairFailed), then refreshes v's row, and every electric
/// row when charging slots were taken.
void update_after_assign(const Instance& inst, PartialSolution& partial, CostLedger& ledger, VehicleIdx v,
                         Task task, const GreedyConfig& config, Execution exec = Execution::parallel);

/// Repeatedly commits the cheapest ledger entry until every trip is assigned.
/// Throws GreedyInfeasible naming the first trip that cannot be placed.
Solution greedy_assign(const Instance& inst, const GreedyConfig& config = {}, Execution exec = Execution::parallel);

}  // namespace fleetopt
