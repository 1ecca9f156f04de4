#include "fleetopt/pipeline/samples.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fleetopt/csv.hpp"
#include "fleetopt/io.hpp"

namespace fleetopt::pipeline {

namespace {

constexpr const char* kSamplesHeader =
    "segment_id,start_ts,end_ts,distance_m,elevation_delta_m,road_class,temp_c,humidity_pct,visibility_km,"
    "precip_mm,wind_ms,speed_ratio,energy_kwh";

std::optional<double> elevation_at(const Segment& seg, double along) {
  const auto& cum = seg.cumulative_m;
  auto it = std::upper_bound(cum.begin(), cum.end(), along);
  std::size_t hi = std::min<std::size_t>(std::distance(cum.begin(), it), cum.size() - 1);
  const std::size_t lo = hi == 0 ? 0 : hi - 1;
  if (!seg.elevation_m[lo] || !seg.elevation_m[hi]) return std::nullopt;
  const double span = cum[hi] - cum[lo];
  const double t = span > 0 ? std::clamp((along - cum[lo]) / span, 0.0, 1.0) : 0.0;
  return *seg.elevation_m[lo] + t * (*seg.elevation_m[hi] - *seg.elevation_m[lo]);
}

template <typename Row>
const Row* nearest(const std::vector<Row>& rows, double ts, double horizon, const char* what) {
  if (rows.empty()) return nullptr;
  auto it = std::lower_bound(rows.begin(), rows.end(), ts, [](const Row& r, double t) { return r.ts_s < t; });
  const Row* best = nullptr;
  if (it != rows.end()) best = &*it;
  if (it != rows.begin()) {
    const Row* prev = &*std::prev(it);
    if (!best || ts - prev->ts_s <= best->ts_s - ts) best = prev;
  }
  if (std::abs(best->ts_s - ts) > horizon) {
    throw FeatureJoinGap(std::string("no ") + what + " row within " + csv::fmt6(horizon) + " s of t=" + csv::fmt6(ts));
  }
  return best;
}

}  // namespace

std::vector<EnergySample> make_samples(const RoadNetwork& network, std::span<const TelemetryPoint> trace,
                                       std::span<const LabeledPoint> labels,
                                       std::span<const std::optional<std::int64_t>> matches,
                                       const FeatureSources& features) {
  if (labels.size() != matches.size()) throw std::invalid_argument("labels and matches are not aligned");
  auto weather = features.weather;
  auto traffic = features.traffic;
  std::sort(weather.begin(), weather.end(), [](const auto& a, const auto& b) { return a.ts_s < b.ts_s; });
  std::sort(traffic.begin(), traffic.end(), [](const auto& a, const auto& b) { return a.ts_s < b.ts_s; });

  std::vector<EnergySample> out;
  std::size_t i = 0;
  while (i < labels.size()) {
    if (!matches[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    double energy = 0.0;
    while (j + 1 < labels.size() && matches[j + 1] == matches[i] && labels[j + 1].index == labels[j].index + 1) {
      ++j;
      energy += labels[j].energy_kwh;
    }
    if (j > i) {
      const auto seg_ix = network.find_segment(*matches[i]);
      if (!seg_ix) throw NetworkError("matched segment " + std::to_string(*matches[i]) + " not in network");
      const Segment& seg = network.segment(*seg_ix);
      const auto& p0 = trace[labels[i].index];
      const auto& p1 = trace[labels[j].index];
      const Projection a = project(seg, network.to_xy(p0.lat, p0.lon));
      const Projection b = project(seg, network.to_xy(p1.lat, p1.lon));

      EnergySample s;
      s.segment_id = seg.id;
      s.start_ts = p0.ts_s;
      s.end_ts = p1.ts_s;
      s.distance_m = std::abs(b.along_m - a.along_m);
      const auto e0 = elevation_at(seg, a.along_m);
      const auto e1 = elevation_at(seg, b.along_m);
      s.elevation_delta_m = (e0 && e1) ? *e1 - *e0 : 0.0;
      s.road_class = seg.highway;
      if (const auto* w = nearest(weather, s.start_ts, features.join_horizon_s, "weather")) {
        s.temp_c = w->temp_c;
        s.humidity_pct = w->humidity_pct;
        s.visibility_km = w->visibility_km;
        s.precip_mm = w->precip_mm;
        s.wind_ms = w->wind_ms;
      }
      if (const auto* t = nearest(traffic, s.start_ts, features.join_horizon_s, "traffic")) {
        s.speed_ratio = t->speed_ratio;
      }
      s.energy_kwh = energy;
      out.push_back(std::move(s));
    }
    i = j + 1;
  }
  return out;
}

std::string samples_csv(std::span<const EnergySample> samples) {
  std::ostringstream out;
  out << kSamplesHeader << '\n';
  for (const auto& s : samples) {
    out << s.segment_id << ',' << csv::fmt6(s.start_ts) << ',' << csv::fmt6(s.end_ts) << ',' << csv::fmt6(s.distance_m)
        << ',' << csv::fmt6(s.elevation_delta_m) << ',' << s.road_class << ',' << csv::fmt6(s.temp_c) << ','
        << csv::fmt6(s.humidity_pct) << ',' << csv::fmt6(s.visibility_km) << ',' << csv::fmt6(s.precip_mm) << ','
        << csv::fmt6(s.wind_ms) << ',' << csv::fmt6(s.speed_ratio) << ',' << csv::fmt6(s.energy_kwh) << '\n';
  }
  return out.str();
}

void write_samples_csv(const std::filesystem::path& path, std::span<const EnergySample> samples) {
  write_text_file(path, samples_csv(samples));
}

std::vector<EnergySample> read_samples_csv(const std::filesystem::path& path) {
  const auto t = csv::Table::read(path);
  const auto num = [&](std::size_t r, const char* col) { return t.number(r, t.column(col)).value_or(0.0); };
  std::vector<EnergySample> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    EnergySample s;
    s.segment_id = csv::parse_int(t.at(r, "segment_id"), "segment_id");
    s.start_ts = num(r, "start_ts");
    s.end_ts = num(r, "end_ts");
    s.distance_m = num(r, "distance_m");
    s.elevation_delta_m = num(r, "elevation_delta_m");
    s.road_class = t.at(r, "road_class");
    s.temp_c = num(r, "temp_c");
    s.humidity_pct = num(r, "humidity_pct");
    s.visibility_km = num(r, "visibility_km");
    s.precip_mm = num(r, "precip_mm");
    s.wind_ms = num(r, "wind_ms");
    s.speed_ratio = num(r, "speed_ratio");
    s.energy_kwh = num(r, "energy_kwh");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<WeatherRow> read_weather_csv(const std::filesystem::path& path) {
  const auto t = csv::Table::read(path);
  const auto num = [&](std::size_t r, const char* col) { return t.number(r, t.column(col)).value_or(0.0); };
  std::vector<WeatherRow> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    out.push_back({num(r, "ts_s"), num(r, "temp_c"), num(r, "humidity_pct"), num(r, "visibility_km"),
                   num(r, "precip_mm"), num(r, "wind_ms")});
  }
  return out;
}

std::vector<TrafficRow> read_traffic_csv(const std::filesystem::path& path) {
  const auto t = csv::Table::read(path);
  std::vector<TrafficRow> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    out.push_back({t.number(r, t.column("ts_s")).value_or(0.0), t.number(r, t.column("speed_ratio")).value_or(1.0)});
  }
  return out;
}

}  // namespace fleetopt::pipeline
