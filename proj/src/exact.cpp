#include "fleetopt/exact.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "fleetopt/feasibility.hpp"
#include "fleetopt/greedy.hpp"
#include "fleetopt/io.hpp"

namespace fleetopt {

const char* to_string(ExactStatus s) {
  switch (s) {
    case ExactStatus::optimal: return "optimal";
    case ExactStatus::infeasible: return "infeasible";
    case ExactStatus::time_limit: return "time_limit";
  }
  return "unknown";
}

nlohmann::json certificate_to_json(const ExactCertificate& c) {
  nlohmann::json j{{"optimal", c.optimal}, {"nodes_explored", c.nodes_explored}};
  j["incumbent_cost"] = c.incumbent_cost ? nlohmann::json(round6(*c.incumbent_cost)) : nlohmann::json();
  return j;
}

namespace {

using Clock = std::chrono::steady_clock;
constexpr Seconds kNever = std::numeric_limits<Seconds>::max();
constexpr double kPruneTol = 1e-9;

struct TimeUp {};

Seconds add_sat(Seconds a, Seconds b) { return (a == kNever || b == kNever) ? kNever : a + b; }

class BranchAndBound {
 public:
  BranchAndBound(const Instance& inst, double limit_s)
      : inst_(inst),
        deadline_(Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(limit_s))),
        trips_of_(inst.vehicle_count()),
        slot_used_(inst.pole_count() * static_cast<std::size_t>(inst.slot_count()), 0) {
    prepare_order();
    prepare_closures();
    prepare_symmetry();
    for (VehicleIdx v = 0; v < inst.vehicle_count(); ++v) {
      if (inst.is_electric(v)) evs_.push_back(v);
    }
  }

  ExactResult run() {
    ExactResult result;
    try {
      branch(0, 0.0);
    } catch (const TimeUp&) {
      timed_out_ = true;
    }
    result.certificate.nodes_explored = nodes_;
    result.certificate.incumbent_cost = best_cost_;
    if (best_cost_) result.solution = solution_from(best_);
    if (timed_out_) {
      result.status = ExactStatus::time_limit;
    } else if (best_cost_) {
      result.status = ExactStatus::optimal;
      result.certificate.optimal = true;
    } else {
      result.status = ExactStatus::infeasible;
    }
    if (result.solution) result.certificate.incumbent_cost = solution_cost(inst_, *result.solution);
    return result;
  }

 private:
  // ---- preprocessing ------------------------------------------------------

  void prepare_order() {
    std::vector<Task> tasks;
    for (TripIdx t = 0; t < inst_.trip_count(); ++t) tasks.push_back(Task::for_trip(t));
    sort_schedule(inst_, tasks);
    for (const Task& x : tasks) order_.push_back(x.index);

    rem_min_.assign(order_.size() + 1, 0.0);
    for (std::size_t i = order_.size(); i-- > 0;) {
      double best = std::numeric_limits<double>::infinity();
      for (VehicleIdx v = 0; v < inst_.vehicle_count(); ++v) {
        best = std::min(best, inst_.cost_weight(v) * inst_.trip_energy(v, order_[i]));
      }
      rem_min_[i] = rem_min_[i + 1] + best;
    }
  }

  void prepare_closures() {
    const std::size_t n = inst_.location_count();
    dtime_.assign(n * n, kNever);
    for (LocationIdx a = 0; a < n; ++a) {
      for (LocationIdx b = 0; b < n; ++b) {
        if (a == b) {
          dtime_[a * n + b] = 0;
        } else if (inst_.has_deadhead(a, b)) {
          dtime_[a * n + b] = inst_.deadhead_time(a, b);
        }
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          dtime_[a * n + b] = std::min(dtime_[a * n + b], add_sat(dtime_[a * n + k], dtime_[k * n + b]));
        }
      }
    }

    // Deadhead energy closure per vehicle (vehicles of one model share it,
    // but per-vehicle storage keeps the lookup trivial).
    const double inf = std::numeric_limits<double>::infinity();
    denergy_.assign(inst_.vehicle_count(), std::vector<double>(n * n, inf));
    for (VehicleIdx v = 0; v < inst_.vehicle_count(); ++v) {
      auto& d = denergy_[v];
      for (LocationIdx a = 0; a < n; ++a) {
        for (LocationIdx b = 0; b < n; ++b) {
          if (a == b) {
            d[a * n + b] = 0.0;
          } else if (inst_.has_deadhead(a, b)) {
            d[a * n + b] = inst_.deadhead_energy(v, a, b);
          }
        }
      }
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t a = 0; a < n; ++a) {
          for (std::size_t b = 0; b < n; ++b) d[a * n + b] = std::min(d[a * n + b], d[a * n + k] + d[k * n + b]);
        }
      }
      for (LocationIdx a = 0; a < n; ++a) {
        for (LocationIdx b = 0; b < n; ++b) {
          if (a != b && inst_.has_deadhead(a, b)) {
            const double direct = inst_.deadhead_energy(v, a, b);
            if (direct - d[a * n + b] > 1e-9 * std::max(1.0, direct)) metric_ = false;
          }
        }
      }
    }
  }

  void prepare_symmetry() {
    std::map<std::pair<ModelIdx, double>, std::uint32_t> classes;
    for (VehicleIdx v = 0; v < inst_.vehicle_count(); ++v) {
      const auto key = std::make_pair(inst_.model_index(v), inst_.initial_charge(v));
      sym_class_.push_back(classes.emplace(key, static_cast<std::uint32_t>(classes.size())).first->second);
    }
    equivalent_lower_.resize(inst_.pole_count());
    for (PoleIdx p = 0; p < inst_.pole_count(); ++p) {
      for (PoleIdx q = 0; q < p; ++q) {
        if (inst_.pole_location(p) == inst_.pole_location(q) &&
            inst_.pole(p).power_per_slot_kwh == inst_.pole(q).power_per_slot_kwh) {
          equivalent_lower_[p].push_back(q);
        }
      }
    }
  }

  Seconds closure_time(LocationIdx a, LocationIdx b) const { return dtime_[a * inst_.location_count() + b]; }
  double closure_energy(VehicleIdx v, LocationIdx a, LocationIdx b) const {
    return denergy_[v][a * inst_.location_count() + b];
  }

  void tick() {
    ++nodes_;
    if ((nodes_ & 1023) == 0 && Clock::now() > deadline_) throw TimeUp{};
  }

  bool prunable(double lower_bound) const { return best_cost_ && lower_bound >= *best_cost_ - kPruneTol; }

  // ---- trip-level search --------------------------------------------------

  /// Optimistic battery test: every slot that fits into an idle gap of v's
  /// trips is charged at the best pole and deadheads are ignored. Checks the
  /// slots whose level no later trip or charge can change.
  bool battery_possible(VehicleIdx v) const {
    const auto& tr = trips_of_[v];
    if (tr.empty()) return true;
    const SlotGrid& grid = inst_.slots();
    const SlotIdx last = grid.slot_of(inst_.trip(tr.back().index).end_s);
    std::vector<double> delta(static_cast<std::size_t>(last) + 1, 0.0);
    for (const Task& x : tr) {
      const SlotIdx s = grid.slot_of(inst_.trip(x.index).end_s);
      if (s <= last) delta[s] -= inst_.trip_energy(v, x.index);
    }
    for (SlotIdx k = 0; k <= last; ++k) {
      double best = 0.0;
      for (PoleIdx p = 0; p < inst_.pole_count(); ++p) {
        const double power = inst_.pole_power(p, v);
        if (power <= best) continue;
        const LocationIdx loc = inst_.pole_location(p);
        for (std::size_t g = 0; g < tr.size(); ++g) {
          const TaskWindow b = window(inst_, tr[g]);
          if (add_sat(grid.slot_end(k), closure_time(loc, b.origin)) > b.start) continue;
          if (g > 0) {
            const TaskWindow a = window(inst_, tr[g - 1]);
            if (add_sat(a.end, closure_time(a.destination, loc)) > grid.slot_start(k)) continue;
          }
          best = power;
          break;
        }
      }
      delta[k] += best;
    }
    double level = inst_.initial_charge(v);
    for (SlotIdx s = 0; s <= last; ++s) {
      level += delta[s];
      if (level < kBatteryEpsilon) return false;
    }
    return true;
  }

  void branch(std::size_t i, double partial) {
    tick();
    if (prunable(partial + rem_min_[i])) return;
    if (i == order_.size()) {
      leaf();
      return;
    }
    const TripIdx t = order_[i];
    const Task x = Task::for_trip(t);

    struct Child {
      double inc;
      VehicleIdx v;
    };
    std::vector<Child> children;
    std::vector<char> class_seen_empty(inst_.vehicle_count(), 0);
    for (VehicleIdx v = 0; v < inst_.vehicle_count(); ++v) {
      const auto& tr = trips_of_[v];
      if (tr.empty()) {
        if (class_seen_empty[sym_class_[v]]) continue;
        class_seen_empty[sym_class_[v]] = 1;
      }
      bool ok = true;
      for (const Task& y : tr) {
        if (!pair_feasible(inst_, y, x)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      double e = inst_.trip_energy(v, t);
      if (!tr.empty()) e += closure_energy(v, inst_.trip_destination(tr.back().index), inst_.trip_origin(t));
      children.push_back({inst_.cost_weight(v) * e, v});
    }
    std::stable_sort(children.begin(), children.end(), [](const Child& a, const Child& b) { return a.inc < b.inc; });

    for (const Child& c : children) {
      trips_of_[c.v].push_back(x);
      if (!inst_.is_electric(c.v) || battery_possible(c.v)) branch(i + 1, partial + c.inc);
      trips_of_[c.v].pop_back();
    }
  }

  // ---- leaf: charging ------------------------------------------------------

  struct CacheEntry {
    bool exact = false;  // value is the optimum; otherwise nothing is cheaper than value
    double value = 0.0;
    std::vector<std::vector<Task>> schedules;  // per electric vehicle, when exact and feasible
  };

  void leaf() {
    double fixed = 0.0;
    for (VehicleIdx v = 0; v < inst_.vehicle_count(); ++v) {
      if (!inst_.is_electric(v)) fixed += inst_.cost_weight(v) * schedule_energy(inst_, v, trips_of_[v]);
    }
    const double inf = std::numeric_limits<double>::infinity();
    const double limit = best_cost_ ? *best_cost_ - fixed - kPruneTol : inf;

    std::vector<std::vector<TripIdx>> key;
    for (VehicleIdx v : evs_) {
      key.emplace_back();
      for (const Task& x : trips_of_[v]) key.back().push_back(x.index);
    }
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      const CacheEntry& e = it->second;
      if (!e.exact && limit <= e.value) return;
      if (e.exact) {
        if (e.value < limit) record(fixed + e.value, e.schedules);
        return;
      }
    }

    ev_limit_ = limit;
    ev_found_ = false;
    setup_candidates();
    current_.assign(evs_.size(), {});
    ev_rest_.assign(evs_.size() + 1, 0.0);
    for (std::size_t e = evs_.size(); e-- > 0;) {
      const VehicleIdx v = evs_[e];
      ev_rest_[e] = ev_rest_[e + 1] + (metric_ ? inst_.cost_weight(v) * schedule_energy(inst_, v, trips_of_[v]) : 0.0);
    }
    if (!(metric_ && ev_rest_[0] >= ev_limit_)) charge_ev(0, 0.0);

    CacheEntry entry;
    if (ev_found_) {
      entry.exact = true;
      entry.value = ev_best_value_;
      entry.schedules = ev_best_;
      record(fixed + ev_best_value_, ev_best_);
    } else if (limit == inf) {
      entry.exact = true;
      entry.value = inf;
    } else {
      entry.value = limit;
    }
    cache_[std::move(key)] = std::move(entry);
  }

  void record(double total, const std::vector<std::vector<Task>>& ev_schedules) {
    best_cost_ = total;
    best_ = trips_of_;
    for (std::size_t e = 0; e < evs_.size(); ++e) best_[evs_[e]] = ev_schedules[e];
  }

  void setup_candidates() {
    const SlotGrid& grid = inst_.slots();
    candidates_.assign(evs_.size(), {});
    used_lb_.assign(evs_.size(), {});
    last_slot_.assign(evs_.size(), -1);
    for (std::size_t e = 0; e < evs_.size(); ++e) {
      const VehicleIdx v = evs_[e];
      const auto& tr = trips_of_[v];
      SlotIdx last = -1;
      if (!tr.empty()) {
        last = grid.slot_of(inst_.trip(tr.back().index).end_s);
      } else if (inst_.initial_charge(v) < kBatteryEpsilon) {
        last = inst_.slot_count() - 1;
      }
      last_slot_[e] = last;
      for (SlotIdx k = 0; k <= last; ++k) {
        for (PoleIdx p = 0; p < inst_.pole_count(); ++p) {
          const Task x = Task::for_charge(p, k);
          if (inst_.pole_power(p, v) > 0.0 && fits_in_schedule(inst_, tr, x)) candidates_[e].push_back(x);
        }
      }
      auto& used = used_lb_[e];
      used.assign(static_cast<std::size_t>(inst_.slot_count()), 0.0);
      for (const Task& x : tr) used[grid.slot_of(inst_.trip(x.index).end_s)] += inst_.trip_energy(v, x.index);
      for (SlotIdx s = 1; s < inst_.slot_count(); ++s) used[s] += used[s - 1];
    }
  }

  bool slot_taken(PoleIdx p, SlotIdx s) const {
    return slot_used_[static_cast<std::size_t>(p) * inst_.slot_count() + s] != 0;
  }
  void set_slot(PoleIdx p, SlotIdx s, bool on) {
    slot_used_[static_cast<std::size_t>(p) * inst_.slot_count() + s] = on ? 1 : 0;
  }

  void charge_ev(std::size_t e, double done) {
    if (e == evs_.size()) {
      if (done < ev_limit_) {
        ev_limit_ = done;
        ev_best_value_ = done;
        ev_best_ = current_;
        ev_found_ = true;
      }
      return;
    }
    current_[e] = trips_of_[evs_[e]];
    charge_slot(e, 0, done);
  }

  /// Decides candidate i of electric vehicle e: leave it out first, then take it.
  void charge_slot(std::size_t e, std::size_t i, double done) {
    tick();
    const VehicleIdx v = evs_[e];
    auto& schedule = current_[e];
    const auto& cands = candidates_[e];
    const double own = inst_.cost_weight(v) * schedule_energy(inst_, v, schedule);
    if (metric_ && done + own + ev_rest_[e + 1] >= ev_limit_) return;

    const BatteryProfile profile = battery_profile(inst_, v, schedule);
    const SlotIdx slots = inst_.slot_count();
    const SlotIdx settled = i < cands.size() ? cands[i].slot - 2 : slots - 1;
    const double cap = inst_.capacity(v);
    for (SlotIdx s = 0; s <= settled; ++s) {
      if (profile.level(s) < kBatteryEpsilon || profile.level(s) > cap + kBatteryEpsilon) return;
    }
    if (i == cands.size()) {
      charge_ev(e + 1, done + own);
      return;
    }

    // Upper bound on what the remaining candidates can add.
    double extra = 0.0;
    std::size_t j = i;
    for (SlotIdx s = 0; s <= last_slot_[e]; ++s) {
      double slot_best = 0.0;
      while (j < cands.size() && cands[j].slot == s) {
        slot_best = std::max(slot_best, inst_.pole_power(cands[j].index, v));
        ++j;
      }
      extra += slot_best;
      if (profile.charged_kwh[s] + extra - used_lb_[e][s] < kBatteryEpsilon) return;
    }

    charge_slot(e, i + 1, done);

    const Task x = cands[i];
    if (slot_taken(x.index, x.slot)) return;
    for (PoleIdx q : equivalent_lower_[x.index]) {
      if (!slot_taken(q, x.slot)) return;  // the same choice on pole q was already explored
    }
    if (!fits_in_schedule(inst_, schedule, x)) return;
    const std::size_t pos = insertion_point(inst_, schedule, x);
    schedule.insert(schedule.begin() + static_cast<std::ptrdiff_t>(pos), x);
    set_slot(x.index, x.slot, true);
    charge_slot(e, i + 1, done);
    set_slot(x.index, x.slot, false);
    schedule.erase(schedule.begin() + static_cast<std::ptrdiff_t>(pos));
  }

  const Instance& inst_;
  Clock::time_point deadline_;
  std::uint64_t nodes_ = 0;
  bool timed_out_ = false;

  std::vector<TripIdx> order_;
  std::vector<double> rem_min_;
  std::vector<std::uint32_t> sym_class_;
  std::vector<std::vector<PoleIdx>> equivalent_lower_;
  std::vector<Seconds> dtime_;
  std::vector<std::vector<double>> denergy_;
  bool metric_ = true;

  Schedules trips_of_;
  std::vector<VehicleIdx> evs_;
  std::optional<double> best_cost_;
  Schedules best_;

  std::map<std::vector<std::vector<TripIdx>>, CacheEntry> cache_;
  std::vector<char> slot_used_;
  std::vector<std::vector<Task>> candidates_;
  std::vector<std::vector<double>> used_lb_;
  std::vector<SlotIdx> last_slot_;
  std::vector<std::vector<Task>> current_;
  std::vector<double> ev_rest_;
  double ev_limit_ = 0.0;
  double ev_best_value_ = 0.0;
  bool ev_found_ = false;
  std::vector<std::vector<Task>> ev_best_;
};

}  // namespace

ExactResult solve_exact(const Instance& inst, double time_limit_s) {
  if (!(time_limit_s > 0.0)) throw std::invalid_argument("time limit must be positive");
  return BranchAndBound(inst, time_limit_s).run();
}

}  // namespace fleetopt
