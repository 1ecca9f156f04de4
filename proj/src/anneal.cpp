#include "fleetopt/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fleetopt/csv.hpp"

namespace fleetopt {

void AnnealConfig::check() const {
  if (k_max < 2) throw std::invalid_argument("k_max must be at least 2");
  if (!(p_start > 0.0 && p_start < 1.0) || !(p_end > 0.0 && p_end < 1.0)) {
    throw std::invalid_argument("p_start and p_end must lie in (0, 1)");
  }
  if (!(p_end < p_start)) throw std::invalid_argument("p_end must be below p_start");
  if (!(p_swap > 0.0 && p_swap <= 1.0)) throw std::invalid_argument("p_swap must lie in (0, 1]");
  if (neighbor_retry_limit < 1) throw std::invalid_argument("neighbor_retry_limit must be positive");
}

Schedule Schedule::from(const AnnealConfig& config) {
  Schedule s;
  s.tau_start = -1.0 / std::log(config.p_start);
  s.tau_end = -1.0 / std::log(config.p_end);
  s.tau_rate = std::pow(s.tau_end / s.tau_start, 1.0 / (config.k_max - 1));
  return s;
}

double Schedule::tau(int k) const { return tau_start * std::pow(tau_rate, k - 1); }

double accept_probability(double delta_e, double delta_avg, double tau_k) {
  return std::exp(-delta_e / (delta_avg * tau_k));
}

int swap_rounds(std::size_t assignments, double p_swap) {
  return std::max(1, static_cast<int>(std::floor(static_cast<double>(assignments) * p_swap)));
}

namespace {

constexpr double kDeltaFloor = 1e-9;

bool pairwise_feasible(const Instance& inst, const std::vector<Task>& schedule) {
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    for (std::size_t j = i + 1; j < schedule.size(); ++j) {
      if (!pair_feasible(inst, schedule[i], schedule[j])) return false;
    }
  }
  return true;
}

}  // namespace

Solution random_neighbor(const Instance& inst, const Solution& current, double p_swap, Rng& rng,
                         const GreedyConfig& greedy, int retry_limit) {
  const auto n = static_cast<std::uint64_t>(inst.vehicle_count());
  if (n < 2) throw NeighborExhausted("a swap needs two vehicles");
  const int rounds = swap_rounds(current.size(), p_swap);
  const Schedules base = schedules_of(inst, current);
  const SlotGrid& grid = inst.slots();

  std::vector<VehicleIdx> owner(inst.trip_count());
  for (const auto& a : current.trips) owner[a.trip] = a.vehicle;

  for (int attempt = 0; attempt < retry_limit; ++attempt) {
    std::vector<VehicleIdx> own = owner;
    std::vector<char> touched(inst.vehicle_count(), 0);
    for (int r = 0; r < rounds; ++r) {
      const auto v1 = static_cast<VehicleIdx>(rng.below(n));
      auto v2 = static_cast<VehicleIdx>(rng.below(n - 1));
      if (v2 >= v1) ++v2;
      const Seconds split = rng.between(grid.day_start_s, grid.day_end_s);
      for (TripIdx t = 0; t < inst.trip_count(); ++t) {
        if (inst.trip(t).start_s < split) continue;
        if (own[t] == v1) {
          own[t] = v2;
        } else if (own[t] == v2) {
          own[t] = v1;
        }
      }
      touched[v1] = touched[v2] = 1;
    }

    Schedules next(inst.vehicle_count());
    std::vector<char> slot_used(inst.pole_count() * static_cast<std::size_t>(inst.slot_count()), 0);
    for (VehicleIdx v = 0; v < inst.vehicle_count(); ++v) {
      if (touched[v]) continue;
      next[v] = base[v];
      for (const Task& x : next[v]) {
        if (!x.is_trip()) slot_used[static_cast<std::size_t>(x.index) * inst.slot_count() + x.slot] = 1;
      }
    }
    for (TripIdx t = 0; t < inst.trip_count(); ++t) {
      if (touched[own[t]]) next[own[t]].push_back(Task::for_trip(t));
    }

    bool ok = true;
    for (VehicleIdx v = 0; v < inst.vehicle_count() && ok; ++v) {
      if (!touched[v]) continue;
      sort_schedule(inst, next[v]);
      ok = pairwise_feasible(inst, next[v]) && repair_charging(inst, v, next[v], slot_used, greedy);
    }
    if (ok) return solution_from(next);
  }
  throw NeighborExhausted("no feasible neighbour after " + std::to_string(retry_limit) + " attempts");
}

AnnealResult anneal_from(const Instance& inst, const Solution& start, const AnnealConfig& config,
                         const GreedyConfig& greedy) {
  config.check();
  const Schedule schedule = Schedule::from(config);
  Rng rng(config.seed);

  AnnealResult result;
  Solution current = start;
  double current_cost = solution_cost(inst, current);
  result.best = current;
  result.best_cost = current_cost;
  result.start_cost = current_cost;
  result.trace.reserve(static_cast<std::size_t>(config.k_max));

  std::size_t accepted_count = 1;  // the start is in the accepted set
  std::optional<double> delta_avg;
  for (int k = 1; k <= config.k_max; ++k) {
    TraceRow row;
    row.iteration = k;
    row.tau = schedule.tau(k);
    Solution candidate;
    try {
      candidate = random_neighbor(inst, current, config.p_swap, rng, greedy, config.neighbor_retry_limit);
    } catch (const NeighborExhausted&) {
      row.best_cost = result.best_cost;
      result.trace.push_back(row);
      continue;
    }
    const double cost = solution_cost(inst, candidate);
    const double delta = cost - current_cost;
    row.delta_e = delta;
    if (!delta_avg) delta_avg = std::abs(delta) > 0.0 ? std::abs(delta) : kDeltaFloor;

    row.accepted = delta < 0.0 || rng.uniform() < accept_probability(delta, *delta_avg, row.tau);
    if (row.accepted) {
      if (config.validate_each_acceptance) {
        const auto report = validate_solution(inst, candidate);
        if (!report.empty()) {
          throw std::logic_error("accepted infeasible solution at iteration " + std::to_string(k) + ": " +
                                 report.front().detail);
        }
      }
      current = std::move(candidate);
      current_cost = cost;
      *delta_avg += (std::abs(delta) - *delta_avg) / static_cast<double>(accepted_count);
      if (*delta_avg <= 0.0) *delta_avg = kDeltaFloor;
      ++accepted_count;
      if (cost < result.best_cost) {
        result.best = current;
        result.best_cost = cost;
      }
    }
    row.best_cost = result.best_cost;
    result.trace.push_back(row);
  }
  return result;
}

AnnealResult anneal_run(const Instance& inst, const AnnealConfig& config, const GreedyConfig& greedy) {
  return anneal_from(inst, greedy_assign(inst, greedy), config, greedy);
}

Solution anneal(const Instance& inst, const AnnealConfig& config, const GreedyConfig& greedy) {
  return anneal_run(inst, config, greedy).best;
}

AnnealResult anneal_restarts(const Instance& inst, const AnnealConfig& config, const GreedyConfig& greedy,
                             int restarts, Execution exec) {
  if (restarts < 1) throw std::invalid_argument("restarts must be positive");
  const Solution start = greedy_assign(inst, greedy);
  std::vector<AnnealResult> results(static_cast<std::size_t>(restarts));
  const auto run = [&](int r) {
    AnnealConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(r);
    results[static_cast<std::size_t>(r)] = anneal_from(inst, start, c, greedy);
  };
  if (exec == Execution::serial) {
    for (int r = 0; r < restarts; ++r) run(r);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < restarts; ++r) run(r);
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r) {
    if (results[r].best_cost < results[best].best_cost) best = r;
  }
  return std::move(results[best]);
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out << "iteration,tau,delta_e,accepted,best_cost\n";
  for (const auto& r : trace) {
    out << r.iteration << ',' << csv::fmt6(r.tau) << ',' << (r.delta_e ? csv::fmt6(*r.delta_e) : "") << ','
        << (r.accepted ? 1 : 0) << ',' << csv::fmt6(r.best_cost) << '\n';
  }
  return out.str();
}

}  // namespace fleetopt
