#include "fleetopt/pipeline/network.hpp"

#include <algorithm>
#include <cmath>

#include "fleetopt/io.hpp"

namespace fleetopt::pipeline {

using nlohmann::json;

Projection project(const Segment& seg, geo::XY p) {
  Projection best;
  best.distance_m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < seg.points.size(); ++i) {
    const geo::XY a = seg.points[i];
    const geo::XY b = seg.points[i + 1];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
    const geo::XY foot{a.x + t * dx, a.y + t * dy};
    const double d = std::hypot(p.x - foot.x, p.y - foot.y);
    if (d < best.distance_m) {
      best.distance_m = d;
      best.foot = foot;
      best.along_m = seg.cumulative_m[i] + t * std::sqrt(len2);
    }
  }
  return best;
}

const std::set<std::string>& default_bus_classes() {
  static const std::set<std::string> classes{"motorway", "trunk",        "primary", "secondary", "tertiary",
                                             "residential", "unclassified", "service", "busway"};
  return classes;
}

RoadNetwork::RoadNetwork(NetworkData data) : data_(std::move(data)) {
  if (data_.nodes.empty()) throw NetworkError("network has no nodes");
  std::unordered_map<std::int64_t, const RoadNode*> by_id;
  double lat = 0;
  double lon = 0;
  for (const auto& n : data_.nodes) {
    if (!by_id.emplace(n.id, &n).second) throw NetworkError("duplicate node id " + std::to_string(n.id));
    lat += n.lat;
    lon += n.lon;
  }
  proj_ = geo::LocalProjection(lat / data_.nodes.size(), lon / data_.nodes.size());

  for (const auto& w : data_.ways) {
    if (w.nodes.size() < 2) throw NetworkError("way " + std::to_string(w.id) + " has fewer than 2 nodes");
    Segment seg;
    seg.id = w.id;
    seg.highway = w.highway;
    double acc = 0.0;
    for (std::size_t i = 0; i < w.nodes.size(); ++i) {
      auto it = by_id.find(w.nodes[i]);
      if (it == by_id.end()) {
        throw NetworkError("way " + std::to_string(w.id) + " references unknown node " + std::to_string(w.nodes[i]));
      }
      const geo::XY p = proj_.to_xy(it->second->lat, it->second->lon);
      if (i > 0) acc += std::hypot(p.x - seg.points.back().x, p.y - seg.points.back().y);
      seg.points.push_back(p);
      seg.cumulative_m.push_back(acc);
      seg.elevation_m.push_back(it->second->elevation_m);
      seg.node_ids.push_back(w.nodes[i]);
    }
    if (!segment_ix_.emplace(w.id, segments_.size()).second) {
      throw NetworkError("duplicate way id " + std::to_string(w.id));
    }
    segments_.push_back(std::move(seg));
  }
}

std::optional<std::size_t> RoadNetwork::find_segment(std::int64_t id) const {
  auto it = segment_ix_.find(id);
  if (it == segment_ix_.end()) return std::nullopt;
  return it->second;
}

NetworkData network_from_json(const json& j) {
  NetworkData d;
  try {
    for (const auto& n : j.at("nodes")) {
      RoadNode node{n.at("id").get<std::int64_t>(), n.at("lat").get<double>(), n.at("lon").get<double>(), std::nullopt};
      if (n.contains("elevation_m") && !n["elevation_m"].is_null()) node.elevation_m = n["elevation_m"].get<double>();
      d.nodes.push_back(node);
    }
    for (const auto& w : j.at("ways")) {
      d.ways.push_back({w.at("id").get<std::int64_t>(), w.at("nodes").get<std::vector<std::int64_t>>(),
                        w.value("highway", std::string("unclassified"))});
    }
  } catch (const json::exception& e) {
    throw NetworkError(std::string("malformed network: ") + e.what());
  }
  return d;
}

json network_to_json(const NetworkData& d) {
  json j;
  j["nodes"] = json::array();
  for (const auto& n : d.nodes) {
    json node{{"id", n.id}, {"lat", n.lat}, {"lon", n.lon}};
    if (n.elevation_m) node["elevation_m"] = *n.elevation_m;
    j["nodes"].push_back(std::move(node));
  }
  j["ways"] = json::array();
  for (const auto& w : d.ways) j["ways"].push_back({{"id", w.id}, {"nodes", w.nodes}, {"highway", w.highway}});
  return j;
}

RoadNetwork load_network(const std::filesystem::path& path) { return RoadNetwork(network_from_json(read_json_file(path))); }

NetworkData make_grid_network(int rows, int cols, double block_m, double origin_lat, double origin_lon) {
  NetworkData d;
  geo::LocalProjection proj(origin_lat, origin_lon);
  const auto node_id = [&](int r, int c) { return static_cast<std::int64_t>(r * cols + c + 1); };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double lat = 0;
      double lon = 0;
      proj.to_latlon({c * block_m, r * block_m}, lat, lon);
      // Gentle slope so samples carry non-trivial elevation changes.
      d.nodes.push_back({node_id(r, c), lat, lon, 200.0 + 0.01 * c * block_m - 0.005 * r * block_m});
    }
  }
  std::int64_t way = 1000;
  for (int r = 0; r < rows; ++r) {
    RoadWay w{way++, {}, r % 3 == 0 ? "primary" : "residential"};
    for (int c = 0; c < cols; ++c) w.nodes.push_back(node_id(r, c));
    d.ways.push_back(std::move(w));
  }
  for (int c = 0; c < cols; ++c) {
    RoadWay w{way++, {}, c % 4 == 0 ? "secondary" : "residential"};
    for (int r = 0; r < rows; ++r) w.nodes.push_back(node_id(r, c));
    d.ways.push_back(std::move(w));
  }
  return d;
}

}  // namespace fleetopt::pipeline
