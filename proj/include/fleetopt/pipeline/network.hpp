#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "fleetopt/geo.hpp"

namespace fleetopt::pipeline {

struct RoadNode {
  std::int64_t id = 0;
  double lat = 0.0;
  double lon = 0.0;
  std::optional<double> elevation_m;
};

struct RoadWay {
  std::int64_t id = 0;
  std::vector<std::int64_t> nodes;
  std::string highway;
};

struct NetworkData {
  std::vector<RoadNode> nodes;
  std::vector<RoadWay> ways;
};

/// One matchable segment per way: its polyline in local meters.
struct Segment {
  std::int64_t id = 0;  // way id
  std::string highway;
  std::vector<geo::XY> points;
  std::vector<double> cumulative_m;  // along-polyline distance at each vertex
  std::vector<std::optional<double>> elevation_m;
  std::vector<std::int64_t> node_ids;
  double length_m() const { return cumulative_m.back(); }
};

struct Projection {
  double distance_m = 0.0;  // point to polyline
  double along_m = 0.0;     // position of the foot point along the polyline
  geo::XY foot;
};

/// Closest point of the polyline to p.
Projection project(const Segment& seg, geo::XY p);

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Highway classes a bus may drive on.
const std::set<std::string>& default_bus_classes();

/// Street graph with per-way segments, projected around the node centroid.
class RoadNetwork {
 public:
  explicit RoadNetwork(NetworkData data);

  const NetworkData& data() const { return data_; }
  const geo::LocalProjection& projection() const { return proj_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const Segment& segment(std::size_t i) const { return segments_[i]; }
  std::optional<std::size_t> find_segment(std::int64_t id) const;

  geo::XY to_xy(double lat, double lon) const { return proj_.to_xy(lat, lon); }

 private:
  NetworkData data_;
  geo::LocalProjection proj_;
  std::vector<Segment> segments_;
  std::unordered_map<std::int64_t, std::size_t> segment_ix_;
};

NetworkData network_from_json(const nlohmann::json& j);
nlohmann::json network_to_json(const NetworkData& data);
RoadNetwork load_network(const std::filesystem::path& path);

/// Rectangular street grid: `rows` east-west and `cols` north-south streets,
/// each one way spanning the grid, crossing at shared nodes `block_m` apart.
NetworkData make_grid_network(int rows, int cols, double block_m, double origin_lat = 35.0456,
                              double origin_lon = -85.3097);

}  // namespace fleetopt::pipeline
