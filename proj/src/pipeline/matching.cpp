#include "fleetopt/pipeline/matching.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/box.hpp>
#include <boost/geometry/geometries/point.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "fleetopt/rng.hpp"

namespace fleetopt::pipeline {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

using BPoint = bg::model::point<double, 2, bg::cs::cartesian>;
using BBox = bg::model::box<BPoint>;
using TreeValue = std::pair<BBox, std::size_t>;

struct SegmentIndex::Tree {
  bgi::rtree<TreeValue, bgi::quadratic<16>> rtree;
};

SegmentIndex::SegmentIndex(const RoadNetwork& network, const std::set<std::string>& bus_classes)
    : network_(&network), tree_(std::make_unique<Tree>()) {
  std::vector<TreeValue> values;
  for (std::size_t i = 0; i < network.segments().size(); ++i) {
    const Segment& seg = network.segment(i);
    if (!bus_classes.contains(seg.highway)) continue;
    double x0 = seg.points[0].x, x1 = x0, y0 = seg.points[0].y, y1 = y0;
    for (const auto& p : seg.points) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    values.emplace_back(BBox(BPoint(x0, y0), BPoint(x1, y1)), i);
  }
  tree_->rtree = bgi::rtree<TreeValue, bgi::quadratic<16>>(values.begin(), values.end());
}

SegmentIndex::~SegmentIndex() = default;
SegmentIndex::SegmentIndex(SegmentIndex&&) noexcept = default;
SegmentIndex& SegmentIndex::operator=(SegmentIndex&&) noexcept = default;

std::vector<SegmentIndex::Candidate> SegmentIndex::within(geo::XY p, double radius_m) const {
  std::vector<TreeValue> hits;
  const BBox query(BPoint(p.x - radius_m, p.y - radius_m), BPoint(p.x + radius_m, p.y + radius_m));
  tree_->rtree.query(bgi::intersects(query), std::back_inserter(hits));
  std::vector<Candidate> out;
  for (const auto& [box, idx] : hits) {
    const double d = project(network_->segment(idx), p).distance_m;
    if (d <= radius_m) out.push_back({idx, d});
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.segment < b.segment; });
  return out;
}

namespace {

using CandidateLists = std::vector<std::vector<SegmentIndex::Candidate>>;

bool contains_segment(const std::vector<SegmentIndex::Candidate>& list, std::size_t seg) {
  auto it = std::lower_bound(list.begin(), list.end(), seg,
                             [](const SegmentIndex::Candidate& c, std::size_t s) { return c.segment < s; });
  return it != list.end() && it->segment == seg;
}

/// Scoring shared by both kernels. `near` lists, per location, the segments
/// within the radius; a neighbor is "near" a candidate iff the candidate is in
/// the neighbor's list.
std::optional<std::int64_t> pick(const RoadNetwork& network, const CandidateLists& near, std::size_t i, int window) {
  const auto& cands = near[i];
  if (cands.empty()) return std::nullopt;
  const std::size_t lo = i >= static_cast<std::size_t>(window) ? i - window : 0;
  const std::size_t hi = std::min(near.size() - 1, i + static_cast<std::size_t>(window));
  int best_score = -1;
  double best_dist = 0.0;
  std::int64_t best_id = 0;
  for (const auto& c : cands) {
    int score = 0;
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j != i && contains_segment(near[j], c.segment)) ++score;
    }
    const std::int64_t id = network.segment(c.segment).id;
    const bool better = score > best_score || (score == best_score && c.distance_m < best_dist) ||
                        (score == best_score && c.distance_m == best_dist && id < best_id);
    if (better) {
      best_score = score;
      best_dist = c.distance_m;
      best_id = id;
    }
  }
  return best_id;
}

}  // namespace

MatchResult map_match(const SegmentIndex& index, std::span<const LatLon> locations, const MatchOptions& options) {
  const RoadNetwork& network = index.network();
  const auto n = static_cast<std::ptrdiff_t>(locations.size());
  CandidateLists near(locations.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    near[i] = index.within(network.to_xy(locations[i].lat, locations[i].lon), options.radius_m);
  }
  MatchResult out(locations.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = pick(network, near, static_cast<std::size_t>(i), options.window);
  }
  return out;
}

MatchResult map_match(const RoadNetwork& network, std::span<const LatLon> locations, const MatchOptions& options) {
  const SegmentIndex index(network, options.bus_classes);
  return map_match(index, locations, options);
}

MatchResult map_match_reference(const RoadNetwork& network, std::span<const LatLon> locations,
                                const MatchOptions& options) {
  CandidateLists near(locations.size());
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const geo::XY p = network.to_xy(locations[i].lat, locations[i].lon);
    for (std::size_t s = 0; s < network.segments().size(); ++s) {
      if (!options.bus_classes.contains(network.segment(s).highway)) continue;
      const double d = project(network.segment(s), p).distance_m;
      if (d <= options.radius_m) near[i].push_back({s, d});
    }
  }
  MatchResult out(locations.size());
  for (std::size_t i = 0; i < locations.size(); ++i) out[i] = pick(network, near, i, options.window);
  return out;
}

namespace {

struct Edge {
  std::size_t segment;
  std::size_t from_vertex;  // polyline vertex index we leave from
  int dir;                  // +1 or -1 along the polyline
};

}  // namespace

SyntheticRoute random_route(const RoadNetwork& network, const std::set<std::string>& bus_classes, int points,
                            double spacing_m, std::uint64_t seed) {
  // node id -> every directed edge leaving it
  std::unordered_map<std::int64_t, std::vector<Edge>> out_edges;
  std::vector<std::size_t> usable;
  for (std::size_t s = 0; s < network.segments().size(); ++s) {
    const Segment& seg = network.segment(s);
    if (!bus_classes.contains(seg.highway) || seg.length_m() <= 0) continue;
    usable.push_back(s);
    for (std::size_t v = 0; v < seg.node_ids.size(); ++v) {
      if (v + 1 < seg.node_ids.size()) out_edges[seg.node_ids[v]].push_back({s, v, +1});
      if (v > 0) out_edges[seg.node_ids[v]].push_back({s, v, -1});
    }
  }
  std::size_t junctions = 0;
  for (const auto& [node, edges] : out_edges) {
    std::set<std::size_t> segs;
    for (const auto& e : edges) segs.insert(e.segment);
    if (segs.size() > 1) ++junctions;
  }
  if (usable.size() < 2 || junctions == 0) throw DegenerateNetwork("network needs at least 2 connected segments");

  Rng rng(seed);
  SyntheticRoute route;
  const std::size_t start_seg = usable[rng.below(usable.size())];
  const Segment& first = network.segment(start_seg);
  Edge edge{start_seg, static_cast<std::size_t>(rng.below(first.points.size() - 1)), +1};
  if (rng.uniform() < 0.5) {
    edge.from_vertex += 1;
    edge.dir = -1;
  }
  double next_sample = rng.uniform(0.0, spacing_m);  // arc length into the current edge
  while (static_cast<int>(route.points.size()) < points) {
    const Segment& seg = network.segment(edge.segment);
    const std::size_t to_vertex = edge.from_vertex + edge.dir;
    const geo::XY a = seg.points[edge.from_vertex];
    const geo::XY b = seg.points[to_vertex];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    while (next_sample < len && static_cast<int>(route.points.size()) < points) {
      const double t = next_sample / len;
      LatLon ll;
      network.projection().to_latlon({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}, ll.lat, ll.lon);
      route.points.push_back(ll);
      route.truth.push_back(seg.id);
      next_sample += spacing_m;
    }
    next_sample -= len;

    const std::int64_t node = seg.node_ids[to_vertex];
    std::vector<Edge> options;
    for (const Edge& e : out_edges[node]) {
      const bool reverse = e.segment == edge.segment && e.dir == -edge.dir;
      if (!reverse) options.push_back(e);
    }
    if (options.empty()) {
      edge = {edge.segment, to_vertex, -edge.dir};  // dead end: turn around
    } else {
      edge = options[rng.below(options.size())];
    }
  }
  return route;
}

std::vector<double> evaluate_matching(const RoadNetwork& network, const EvaluationOptions& options) {
  const SegmentIndex index(network, options.match.bus_classes);
  std::vector<SyntheticRoute> routes;
  for (int r = 0; r < options.routes; ++r) {
    routes.push_back(random_route(network, options.match.bus_classes, options.points_per_route, options.spacing_m,
                                  options.seed * 1000003ULL + static_cast<std::uint64_t>(r)));
  }
  std::vector<double> accuracy;
  for (std::size_t k = 0; k < options.sigmas_m.size(); ++k) {
    const double sigma = options.sigmas_m[k];
    Rng noise(options.seed * 7919ULL + k * 104729ULL + 17);
    std::size_t correct = 0;
    std::size_t total = 0;
    for (const auto& route : routes) {
      std::vector<LatLon> noisy;
      noisy.reserve(route.points.size());
      for (const auto& p : route.points) {
        geo::XY xy = network.to_xy(p.lat, p.lon);
        xy.x += sigma * noise.normal();
        xy.y += sigma * noise.normal();
        LatLon q;
        network.projection().to_latlon(xy, q.lat, q.lon);
        noisy.push_back(q);
      }
      const MatchResult matched = map_match(index, noisy, options.match);
      for (std::size_t i = 0; i < matched.size(); ++i) {
        ++total;
        if (matched[i] && *matched[i] == route.truth[i]) ++correct;
      }
    }
    accuracy.push_back(total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0);
  }
  return accuracy;
}

}  // namespace fleetopt::pipeline
