#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "fleetopt/feasibility.hpp"
#include "fleetopt/instance.hpp"
#include "fleetopt/solution.hpp"

namespace fleetopt {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rounds to 6 decimals; used for every reported (not stored) number.
double round6(double x);

nlohmann::json instance_to_json(const InstanceData& data);
InstanceData instance_from_json(const nlohmann::json& j);

/// Reads and fully validates an instance file. Throws ParseError or ValidationError.
Instance load_instance(const std::filesystem::path& path);
void save_instance(const InstanceData& data, const std::filesystem::path& path);
std::string dump_instance(const InstanceData& data);

struct SolutionMeta {
  std::string algorithm;
  std::optional<std::uint64_t> seed;
  double wall_time_ms = 0.0;
  std::optional<nlohmann::json> certificate;
};

nlohmann::json solution_to_json(const Instance& inst, const Solution& sol, const SolutionMeta& meta);
/// Resolves ids against `inst`; unknown ids are a ParseError.
Solution solution_from_json(const Instance& inst, const nlohmann::json& j);
Solution load_solution(const Instance& inst, const std::filesystem::path& path);

nlohmann::json report_to_json(const Instance& inst, const ValidationReport& report);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fleetopt
