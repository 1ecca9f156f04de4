#include "fleetopt/pipeline/telemetry.hpp"

#include <sstream>

#include "fleetopt/csv.hpp"

namespace fleetopt::pipeline {

namespace {
constexpr double kJoulesPerKwh = 3.6e6;
}

TelemetryTrace read_trace_csv(const std::filesystem::path& path) {
  const auto table = csv::Table::read(path);
  const auto ts = table.column("ts_s");
  const auto lat = table.column("lat");
  const auto lon = table.column("lon");
  const auto opt_col = [&](const char* name) -> std::optional<std::size_t> {
    if (table.has_column(name)) return table.column(name);
    return std::nullopt;
  };
  const auto cur = opt_col("current_a");
  const auto volt = opt_col("voltage_v");
  const auto soc = opt_col("soc_pct");
  const auto cable = opt_col("cable");
  const auto fuel = opt_col("fuel_gal");

  TelemetryTrace trace;
  trace.reserve(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    TelemetryPoint p;
    p.ts_s = table.number(r, ts).value_or(0.0);
    p.lat = table.number(r, lat).value_or(0.0);
    p.lon = table.number(r, lon).value_or(0.0);
    if (cur) p.current_a = table.number(r, *cur);
    if (volt) p.voltage_v = table.number(r, *volt);
    if (soc) p.soc_pct = table.number(r, *soc);
    if (cable) {
      if (auto c = table.number(r, *cable)) p.cable = static_cast<int>(*c);
    }
    if (fuel) p.fuel_gal = table.number(r, *fuel);
    trace.push_back(p);
  }
  return trace;
}

std::string trace_csv(std::span<const TelemetryPoint> trace) {
  std::ostringstream out;
  out << "ts_s,lat,lon,current_a,voltage_v,soc_pct,cable,fuel_gal\n";
  const auto opt = [](const std::optional<double>& v) { return v ? csv::fmt6(*v) : std::string(); };
  for (const auto& p : trace) {
    out << csv::fmt6(p.ts_s) << ',' << csv::fmt6(p.lat) << ',' << csv::fmt6(p.lon) << ',' << opt(p.current_a) << ','
        << opt(p.voltage_v) << ',' << opt(p.soc_pct) << ',' << (p.cable ? std::to_string(*p.cable) : "") << ','
        << opt(p.fuel_gal) << '\n';
  }
  return out.str();
}

bool inside(const Geofence& fence, LatLon p) {
  bool in = false;
  for (std::size_t i = 0, j = fence.size() - 1; i < fence.size(); j = i++) {
    const auto& a = fence[i];
    const auto& b = fence[j];
    if ((a.lat > p.lat) != (b.lat > p.lat) &&
        p.lon < (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon) {
      in = !in;
    }
  }
  return in;
}

std::vector<LabeledPoint> clean_and_label(std::span<const TelemetryPoint> trace, VehicleKind kind,
                                          const LabelOptions& options) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (!(trace[i].ts_s > trace[i - 1].ts_s)) throw NonMonotonicTimestamps(i);
  }

  const auto keep = [&](const TelemetryPoint& p) {
    if (p.cable && *p.cable == 1) return false;
    for (const auto& g : options.garages) {
      if (g.size() >= 3 && inside(g, {p.lat, p.lon})) return false;
    }
    return true;
  };

  std::vector<LabeledPoint> out;
  bool prev_kept = false;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& p = trace[i];
    if (!keep(p)) {
      prev_kept = false;
      continue;
    }
    double energy = 0.0;
    if (prev_kept) {
      const auto& q = trace[i - 1];
      if (kind == VehicleKind::electric) {
        energy = p.current_a.value_or(0.0) * p.voltage_v.value_or(0.0) * (p.ts_s - q.ts_s) / kJoulesPerKwh;
      } else if (p.fuel_gal && q.fuel_gal) {
        const double burned = *q.fuel_gal - *p.fuel_gal;
        if (burned < 0) {
          // Refuelling: the interval carries no usable label.
          prev_kept = false;
          continue;
        }
        energy = burned * options.kwh_per_gallon;
      }
    }
    out.push_back({i, energy});
    prev_kept = true;
  }
  if (out.empty()) throw EmptyAfterFilter();
  return out;
}

}  // namespace fleetopt::pipeline
