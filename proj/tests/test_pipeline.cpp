#include <doctest.h>

#include <cmath>

#include "fleetopt/geo.hpp"
#include "fleetopt/pipeline/matching.hpp"
#include "fleetopt/pipeline/regression.hpp"
#include "fleetopt/pipeline/samples.hpp"
#include "fleetopt/rng.hpp"

using namespace fleetopt;
using namespace fleetopt::pipeline;

namespace {

const geo::LocalProjection kLocal(35.0, -85.0);

LatLon at_xy(double x, double y) {
  LatLon p;
  kLocal.to_latlon({x, y}, p.lat, p.lon);
  return p;
}

// Straight ways given as (id, x0, y0, x1, y1) in local meters.
struct Line {
  std::int64_t id;
  double x0, y0, x1, y1;
};

RoadNetwork lines_network(std::initializer_list<Line> lines) {
  NetworkData d;
  std::int64_t node = 1;
  for (const auto& l : lines) {
    const LatLon a = at_xy(l.x0, l.y0);
    const LatLon b = at_xy(l.x1, l.y1);
    d.nodes.push_back({node, a.lat, a.lon, std::nullopt});
    d.nodes.push_back({node + 1, b.lat, b.lon, std::nullopt});
    d.ways.push_back({l.id, {node, node + 1}, "primary"});
    node += 2;
  }
  return RoadNetwork(std::move(d));
}

TelemetryPoint electric(double ts, double amps, double volts, std::optional<int> cable = 0) {
  TelemetryPoint p;
  p.ts_s = ts;
  p.current_a = amps;
  p.voltage_v = volts;
  p.cable = cable;
  return p;
}

EnergySample sample(double distance_m, double energy, const std::string& road_class = "primary") {
  EnergySample s;
  s.distance_m = distance_m;
  s.road_class = road_class;
  s.energy_kwh = energy;
  return s;
}

}  // namespace

TEST_SUITE("energy_pipeline") {
  TEST_CASE("electric energy label") {
    const std::vector<TelemetryPoint> trace{electric(0, 100, 600), electric(1, 100, 600)};
    const auto labels = clean_and_label(trace, VehicleKind::electric);
    REQUIRE(labels.size() == 2);
    CHECK(labels[0].energy_kwh == 0.0);
    CHECK(labels[1].energy_kwh == doctest::Approx(60000.0 / 3.6e6).epsilon(1e-12));
    CHECK(labels[1].energy_kwh == doctest::Approx(0.016667).epsilon(1e-4));
  }

  TEST_CASE("charging points are dropped") {
    const std::vector<TelemetryPoint> trace{electric(0, 50, 600), electric(1, 50, 600, 1), electric(2, 50, 600, 1),
                                            electric(3, 50, 600), electric(4, 50, 600)};
    const auto labels = clean_and_label(trace, VehicleKind::electric);
    REQUIRE(labels.size() == 3);
    CHECK(labels[0].index == 0);
    CHECK(labels[1].index == 3);
    CHECK(labels[1].energy_kwh == 0.0);  // its predecessor was filtered
    CHECK(labels[2].energy_kwh > 0.0);
  }

  TEST_CASE("fuel label and refuelling") {
    std::vector<TelemetryPoint> trace(4);
    const double fuel[] = {100.00, 99.95, 120.0, 119.9};
    for (int i = 0; i < 4; ++i) {
      trace[i].ts_s = i * 10.0;
      trace[i].fuel_gal = fuel[i];
    }
    const auto labels = clean_and_label(trace, VehicleKind::liquid_fuel);
    REQUIRE(labels.size() == 3);
    CHECK(labels[1].energy_kwh == doctest::Approx(1.8975).epsilon(1e-9));
    CHECK(labels[2].index == 3);
    CHECK(labels[2].energy_kwh == 0.0);
  }

  TEST_CASE("garage geofence and bad traces") {
    std::vector<TelemetryPoint> trace{electric(0, 10, 600), electric(1, 10, 600)};
    const LatLon inner = at_xy(0, 0);
    trace[0].lat = trace[1].lat = inner.lat;
    trace[0].lon = trace[1].lon = inner.lon;
    LabelOptions opt;
    opt.garages = {{at_xy(-10, -10), at_xy(10, -10), at_xy(10, 10), at_xy(-10, 10)}};
    CHECK_THROWS_AS(clean_and_label(trace, VehicleKind::electric, opt), EmptyAfterFilter);

    trace[1].ts_s = 0;
    CHECK_THROWS_AS(clean_and_label(trace, VehicleKind::electric), NonMonotonicTimestamps);
  }

  TEST_CASE("isolated segment") {
    const RoadNetwork net = lines_network({{5, 0, 0, 100, 0}, {6, 0, 500, 100, 500}});
    const std::vector<LatLon> pts{at_xy(40, 0)};
    const MatchResult m = map_match(net, pts, {});
    REQUIRE(m.size() == 1);
    CHECK(m[0] == 5);
  }

  TEST_CASE("neighbours break a distance tie") {
    const RoadNetwork net = lines_network({{1, -100, 0, 300, 0}, {2, -100, 40, 300, 40}});
    std::vector<LatLon> pts;
    for (int i = 0; i < 10; ++i) pts.push_back(at_xy(i * 15.0, 2.0));
    pts.push_back(at_xy(150.0, 20.0));
    for (int i = 11; i < 21; ++i) pts.push_back(at_xy(i * 15.0, 2.0));
    MatchOptions opt;
    opt.radius_m = 30.0;
    const MatchResult m = map_match(net, pts, opt);
    CHECK(m[10] == 1);
    CHECK(map_match_reference(net, pts, opt) == m);
  }

  TEST_CASE("nothing within the radius") {
    const RoadNetwork net = lines_network({{1, 0, 0, 100, 0}});
    const std::vector<LatLon> pts{at_xy(50, 500)};
    CHECK_FALSE(map_match(net, pts, {})[0].has_value());
  }

  TEST_CASE("indexed matcher agrees with the brute-force reference") {
    const RoadNetwork net(make_grid_network(8, 8, 150.0));
    const SyntheticRoute route = random_route(net, default_bus_classes(), 300, 15.0, 4);
    Rng rng(8);
    std::vector<LatLon> noisy;
    const auto& proj = net.projection();
    for (const auto& p : route.points) {
      geo::XY xy = proj.to_xy(p.lat, p.lon);
      xy.x += 40.0 * rng.normal();
      xy.y += 40.0 * rng.normal();
      LatLon q;
      proj.to_latlon(xy, q.lat, q.lon);
      noisy.push_back(q);
    }
    MatchOptions opt;
    CHECK(map_match(net, noisy, opt) == map_match_reference(net, noisy, opt));
  }

  TEST_CASE("accuracy on clean and slightly noisy routes") {
    const RoadNetwork net(make_grid_network(25, 25, 200.0));
    EvaluationOptions opt;
    opt.sigmas_m = {0.0, 1.1};
    const auto acc = evaluate_matching(net, opt);
    CHECK(acc[0] >= 0.99);
    CHECK(acc[1] >= 0.98);
  }

  TEST_CASE("a run on one segment becomes one sample") {
    const RoadNetwork net = lines_network({{7, 0, 0, 100, 0}});
    std::vector<TelemetryPoint> trace(3);
    const double xs[] = {10.0, 50.0, 90.0};
    for (int i = 0; i < 3; ++i) {
      const LatLon p = at_xy(xs[i], 0.0);
      trace[i].ts_s = i;
      trace[i].lat = p.lat;
      trace[i].lon = p.lon;
    }
    const std::vector<LabeledPoint> labels{{0, 0.0}, {1, 0.1}, {2, 0.2}};
    const MatchResult matches{7, 7, 7};
    const auto samples = make_samples(net, trace, labels, matches, {});
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].segment_id == 7);
    CHECK(samples[0].energy_kwh == doctest::Approx(0.3));
    CHECK(samples[0].distance_m == doctest::Approx(80.0).epsilon(1e-6));
    CHECK(samples[0].road_class == "primary");
  }

  TEST_CASE("unmatched points split runs") {
    const RoadNetwork net = lines_network({{7, 0, 0, 100, 0}});
    std::vector<TelemetryPoint> trace(6);
    for (int i = 0; i < 6; ++i) {
      const LatLon p = at_xy(10.0 + 15.0 * i, 0.0);
      trace[i].ts_s = i;
      trace[i].lat = p.lat;
      trace[i].lon = p.lon;
    }
    std::vector<LabeledPoint> labels;
    for (std::size_t i = 0; i < 6; ++i) labels.push_back({i, 0.05});
    const MatchResult matches{7, 7, std::nullopt, std::nullopt, 7, 7};
    CHECK(make_samples(net, trace, labels, matches, {}).size() == 2);

    FeatureSources features;
    features.weather = {{100000.0, 20, 50, 10, 0, 3}};
    CHECK_THROWS_AS(make_samples(net, trace, labels, matches, features), FeatureJoinGap);
    features.weather = {{30.0, 20, 50, 10, 0, 3}};
    features.traffic = {{0.0, 0.8}};
    const auto joined = make_samples(net, trace, labels, matches, features);
    CHECK(joined[0].temp_c == 20.0);
    CHECK(joined[0].speed_ratio == 0.8);
  }

  TEST_CASE("exact linear data is recovered") {
    std::vector<EnergySample> samples;
    Rng rng(3);
    for (int i = 0; i < 40; ++i) {
      const double d = rng.uniform(100.0, 3000.0);
      samples.push_back(sample(d, 2.0 * d / 1000.0 + 1.0));
    }
    const LinearModel m = fit_ols(samples);
    CHECK(m.features[0] == "distance_m");
    CHECK(m.coefficients[0] == doctest::Approx(0.002).epsilon(1e-6));
    CHECK(std::abs(m.intercept - 1.0) < 1e-6);
    for (const auto& s : samples) CHECK(std::abs(predict(m, s) - s.energy_kwh) < 1e-6);
  }

  TEST_CASE("all features and road classes") {
    std::vector<EnergySample> samples;
    Rng rng(11);
    const char* classes[] = {"primary", "residential", "secondary"};
    const double class_effect[] = {0.0, 0.4, -0.25};
    for (int i = 0; i < 80; ++i) {
      EnergySample s = sample(rng.uniform(50, 2000), 0.0, classes[i % 3]);
      s.elevation_delta_m = rng.uniform(-10, 10);
      s.temp_c = rng.uniform(-5, 35);
      s.humidity_pct = rng.uniform(20, 90);
      s.visibility_km = rng.uniform(1, 16);
      s.precip_mm = rng.uniform(0, 5);
      s.wind_ms = rng.uniform(0, 12);
      s.speed_ratio = rng.uniform(0.4, 1.2);
      s.energy_kwh = 0.0015 * s.distance_m + 0.03 * s.elevation_delta_m - 0.01 * s.temp_c + 0.002 * s.humidity_pct -
                     0.02 * s.visibility_km + 0.1 * s.precip_mm + 0.015 * s.wind_ms - 0.5 * s.speed_ratio +
                     class_effect[i % 3] + 0.7;
      samples.push_back(s);
    }
    const LinearModel m = fit_ols(samples);
    const std::vector<double> expected{0.0015, 0.03, -0.01, 0.002, -0.02, 0.1, 0.015, -0.5, 0.4, -0.25};
    REQUIRE(m.coefficients.size() == expected.size());
    for (std::size_t k = 0; k < expected.size(); ++k) CHECK(std::abs(m.coefficients[k] - expected[k]) < 1e-6);
    CHECK(std::abs(m.intercept - 0.7) < 1e-6);
    CHECK(m.features.back() == "road_class=secondary");
    CHECK_FALSE(m.elevation_missing);

    const LinearModel back = model_from_json(model_to_json(m));
    CHECK(predict(back, samples[5]) == predict(m, samples[5]));
    CHECK_THROWS_AS(predict(m, sample(100, 0, "motorway")), EncodingMismatch);
  }

  TEST_CASE("residuals are orthogonal to the design") {
    Rng rng(5);
    const Eigen::Index n = 60;
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, 0) = rng.uniform(0, 10);
      x(i, 1) = rng.uniform(-3, 3);
      x(i, 2) = rng.uniform(100, 200);
      y(i) = 1.5 * x(i, 0) - 2.0 * x(i, 1) + 0.01 * x(i, 2) + 4.0 + rng.normal();
    }
    const LeastSquaresFit fit = fit_least_squares(x, y);
    const Eigen::VectorXd r = (y - x * fit.coefficients).array() - fit.intercept;
    CHECK(std::abs(r.sum()) < 1e-6);
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(std::abs(x.col(j).dot(r)) < 1e-6);
    CHECK_FALSE(fit.ridge);
  }

  TEST_CASE("duplicated column falls back to ridge") {
    Rng rng(6);
    const Eigen::Index n = 30;
    Eigen::MatrixXd single(n, 1);
    Eigen::MatrixXd twice(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      single(i, 0) = twice(i, 0) = twice(i, 1) = rng.uniform(0, 5);
      y(i) = 3.0 * single(i, 0) + 1.0 + 0.1 * rng.normal();
    }
    const LeastSquaresFit a = fit_least_squares(single, y);
    const LeastSquaresFit b = fit_least_squares(twice, y);
    CHECK(b.ridge);
    const Eigen::VectorXd pa = (single * a.coefficients).array() + a.intercept;
    const Eigen::VectorXd pb = (twice * b.coefficients).array() + b.intercept;
    CHECK((pa - pb).cwiseAbs().maxCoeff() < 1e-6);
  }

  TEST_CASE("too few samples") {
    std::vector<EnergySample> samples{sample(100, 1), sample(200, 2)};
    CHECK_THROWS_AS(fit_ols(samples), InsufficientSamples);
  }

  TEST_CASE("trip energy is floored at zero") {
    LinearModel m;
    m.features = numeric_feature_names();
    m.coefficients.assign(m.features.size(), 0.0);
    m.road_classes = {"primary"};
    m.intercept = -0.3;
    CHECK(predict_trip_energy(m, {}) == 0.0);
    const std::vector<EnergySample> one{sample(100, 0)};
    CHECK(predict(m, one[0]) == doctest::Approx(-0.3));
    CHECK(predict_trip_energy(m, one) == 0.0);
    m.intercept = 0.25;
    const std::vector<EnergySample> two{sample(100, 0), sample(50, 0)};
    CHECK(predict_trip_energy(m, two) == doctest::Approx(0.5));
  }
}
