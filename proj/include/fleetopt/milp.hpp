#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fleetopt/instance.hpp"
#include "fleetopt/solution.hpp"

namespace fleetopt {

enum class VarType : std::uint8_t { binary, continuous };
enum class Sense : std::uint8_t { le, ge, eq };

struct MilpVar {
  std::string name;
  VarType type = VarType::binary;
  double lower = 0.0;
  double upper = 1.0;
};

struct MilpTerm {
  std::uint32_t var = 0;
  double coef = 0.0;
};

struct MilpConstraint {
  std::string name;
  std::vector<MilpTerm> terms;
  Sense sense = Sense::eq;
  double rhs = 0.0;
};

struct MilpModel {
  std::vector<MilpVar> vars;
  std::vector<MilpConstraint> constraints;
  std::vector<MilpTerm> objective;  // minimized

  std::uint32_t add_var(std::string name, VarType type, double lower, double upper);
  std::optional<std::uint32_t> find(const std::string& name) const;
  const MilpConstraint* constraint(const std::string& name) const;

 private:
  std::map<std::string, std::uint32_t> by_name_;
};

/// Equality up to variable, constraint and term order: names, types, bounds,
/// senses, right-hand sides and coefficients must all match exactly.
bool same_model(const MilpModel& a, const MilpModel& b);

class ModelTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultMilpVarCap = 5'000'000;

/// Replaces every character outside [A-Za-z0-9_] by '_'.
std::string sanitize_id(const std::string& id);

/// Variable count build_milp would create.
std::size_t projected_var_count(const Instance& inst);

/// The integer program: a_v_t, ach_v_cp_s, m_v_x1_x2 binaries, c_v_s charged
/// energy and e_v_s battery level (e_v_0 fixed to the initial charge).
///
/// Constraint families (row name prefixes): trip_ exactly-one per trip,
/// slot_ at-most-one per charging slot, fb_ forbidden pairs, lk_ non-service
/// linking, cap_ charging cap, bal_ battery recurrence.
MilpModel build_milp(const Instance& inst, std::size_t var_cap = kDefaultMilpVarCap);

/// Name of the assignment variable of task x on vehicle v.
std::string task_var_name(const Instance& inst, VehicleIdx v, Task x);

std::string lp_text(const MilpModel& model);
void export_lp(const MilpModel& model, const std::filesystem::path& path);

class LpParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

MilpModel parse_lp(const std::string& text);
MilpModel read_lp(const std::filesystem::path& path);

/// Value of every variable implied by a solution: assignment and linking
/// binaries, full-slot charging, and the battery levels obtained by running
/// the bal_ recurrence rows forward.
std::vector<double> implied_values(const Instance& inst, const MilpModel& model, const Solution& sol);

}  // namespace fleetopt
