#pragma once

#include <cstdint>

#include "fleetopt/instance.hpp"

namespace fleetopt {

struct GeneratorParams {
  int lines = 1;
  int trips_per_line = 10;
  int evs = 3;
  int icev_factor = 5;
  std::uint64_t seed = 1;
};

inline constexpr int kMaxGeneratedIcevs = 50;

/// Synthetic mixed-fleet instance: each line shuttles between two terminals,
/// one depot with two charging poles, hourly slots over one day. Deterministic
/// in the seed.
InstanceData generate_instance(const GeneratorParams& params);

}  // namespace fleetopt
