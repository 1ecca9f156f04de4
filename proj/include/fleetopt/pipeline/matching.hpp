#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fleetopt/pipeline/network.hpp"
#include "fleetopt/pipeline/telemetry.hpp"

namespace fleetopt::pipeline {

struct MatchOptions {
  double radius_m = 100.0;
  int window = 10;  // neighbors counted on each side
  std::set<std::string> bus_classes = default_bus_classes();
};

/// Matched segment id per location; nullopt marks an unmatched location.
using MatchResult = std::vector<std::optional<std::int64_t>>;

/// R-tree over the bounding boxes of bus-legal segments.
class SegmentIndex {
 public:
  SegmentIndex(const RoadNetwork& network, const std::set<std::string>& bus_classes);
  ~SegmentIndex();
  SegmentIndex(SegmentIndex&&) noexcept;
  SegmentIndex& operator=(SegmentIndex&&) noexcept;

  const RoadNetwork& network() const { return *network_; }

  struct Candidate {
    std::size_t segment = 0;  // index into network().segments()
    double distance_m = 0.0;
  };
  /// Segments whose polyline comes within radius_m of p, ordered by segment index.
  std::vector<Candidate> within(geo::XY p, double radius_m) const;

 private:
  struct Tree;
  const RoadNetwork* network_;
  std::unique_ptr<Tree> tree_;
};

/// Heuristic matcher, parallel over locations. Candidates come from the index;
/// each is scored by how many of the `window` preceding and following
/// locations also lie within the radius of it. Highest score wins, then the
/// smaller point-to-polyline distance, then the smaller segment id.
MatchResult map_match(const SegmentIndex& index, std::span<const LatLon> locations, const MatchOptions& options);

/// Convenience overload building a throwaway index.
MatchResult map_match(const RoadNetwork& network, std::span<const LatLon> locations, const MatchOptions& options);

/// Serial reference: same rule, brute force over every segment, no index.
MatchResult map_match_reference(const RoadNetwork& network, std::span<const LatLon> locations,
                                const MatchOptions& options);

class DegenerateNetwork : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SyntheticRoute {
  std::vector<LatLon> points;
  std::vector<std::int64_t> truth;  // generating segment id per point
};

/// Random walk over connected bus-legal ways, sampled every spacing_m along the path.
SyntheticRoute random_route(const RoadNetwork& network, const std::set<std::string>& bus_classes,
                            int points, double spacing_m, std::uint64_t seed);

struct EvaluationOptions {
  int routes = 10;
  int points_per_route = 200;
  std::vector<double> sigmas_m{1.1, 20, 60, 100, 140};
  std::uint64_t seed = 1;
  double spacing_m = 15.0;
  MatchOptions match;
};

/// Fraction of noisy on-road locations matched to their true segment, one
/// value per sigma. Routes are shared across sigmas; noise is isotropic
/// Gaussian in local meters.
std::vector<double> evaluate_matching(const RoadNetwork& network, const EvaluationOptions& options);

}  // namespace fleetopt::pipeline
