#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fleetopt/greedy.hpp"
#include "fleetopt/rng.hpp"

namespace fleetopt {

struct AnnealConfig {
  int k_max = 10000;
  double p_start = 0.7;
  double p_end = 0.001;
  double p_swap = 0.02;
  std::uint64_t seed = 1;
  int neighbor_retry_limit = 50;
  bool validate_each_acceptance = false;  // debug mode

  /// Throws std::invalid_argument when the parameter invariants fail.
  void check() const;
};

/// Geometric temperature schedule; tau(1) = tau_start, tau(k_max) = tau_end.
struct Schedule {
  double tau_start = 0.0;
  double tau_end = 0.0;
  double tau_rate = 0.0;

  static Schedule from(const AnnealConfig& config);
  double tau(int k) const;
};

class NeighborExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// exp(-delta_e / (delta_avg * tau_k)).
double accept_probability(double delta_e, double delta_avg, double tau_k);

/// Number of swap rounds in one neighbour: max(1, floor(|A| * p_swap)).
int swap_rounds(std::size_t assignments, double p_swap);

/// Swaps the owners of every trip starting at or after a random split time
/// between two random vehicles, repeated swap_rounds times, then rebuilds the
/// charging of the touched electric vehicles with the greedy repair. Retries
/// infeasible candidates up to the limit, then throws NeighborExhausted.
Solution random_neighbor(const Instance& inst, const Solution& current, double p_swap, Rng& rng,
                         const GreedyConfig& greedy = {}, int retry_limit = 50);

struct TraceRow {
  int iteration = 0;
  double tau = 0.0;
  std::optional<double> delta_e;  // empty when the neighbourhood was exhausted
  bool accepted = false;
  double best_cost = 0.0;
};

struct AnnealResult {
  Solution best;
  double best_cost = 0.0;
  double start_cost = 0.0;
  std::vector<TraceRow> trace;
};

/// Simulated annealing started from the greedy solution. Runs exactly k_max
/// iterations and returns the cheapest accepted solution.
AnnealResult anneal_run(const Instance& inst, const AnnealConfig& config, const GreedyConfig& greedy = {});

/// Same, from a caller-supplied feasible start.
AnnealResult anneal_from(const Instance& inst, const Solution& start, const AnnealConfig& config,
                         const GreedyConfig& greedy = {});

Solution anneal(const Instance& inst, const AnnealConfig& config, const GreedyConfig& greedy = {});

/// Independent runs with seeds seed, seed+1, ...; the cheapest wins, earlier
/// restarts on ties. Runs concurrently unless `exec` is serial.
AnnealResult anneal_restarts(const Instance& inst, const AnnealConfig& config, const GreedyConfig& greedy,
                             int restarts, Execution exec = Execution::parallel);

std::string trace_csv(const std::vector<TraceRow>& trace);

}  // namespace fleetopt
