#pragma once

#include <cstdint>
#include <optional>

#include <json.hpp>

#include "fleetopt/instance.hpp"
#include "fleetopt/solution.hpp"

namespace fleetopt {

enum class ExactStatus { optimal, infeasible, time_limit };

const char* to_string(ExactStatus s);

struct ExactCertificate {
  bool optimal = false;
  std::uint64_t nodes_explored = 0;
  std::optional<double> incumbent_cost;
};

struct ExactResult {
  ExactStatus status = ExactStatus::infeasible;
  std::optional<Solution> solution;  // the incumbent; empty when none was found
  ExactCertificate certificate;
};

/// Depth-first branch and bound over trip-to-vehicle choices in chronological
/// trip order, cheapest vehicle first. Each complete assignment gets the
/// cheapest feasible charging found by exhaustive search over slots that fit
/// into the electric vehicles' idle gaps. Charging uses whole slots.
ExactResult solve_exact(const Instance& inst, double time_limit_s);

nlohmann::json certificate_to_json(const ExactCertificate& c);

}  // namespace fleetopt
