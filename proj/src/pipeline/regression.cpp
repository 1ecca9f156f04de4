#include "fleetopt/pipeline/regression.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fleetopt/io.hpp"

namespace fleetopt::pipeline {

using nlohmann::json;

LeastSquaresFit fit_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n != y.size()) throw std::invalid_argument("design matrix and target differ in length");
  if (n < p + 1) {
    throw InsufficientSamples("need at least " + std::to_string(p + 1) + " samples, got " + std::to_string(n));
  }

  const Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::RowVectorXd scale(p);
  Eigen::MatrixXd z = x.rowwise() - mean;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double sd = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n));
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean(j)))) {
      z.col(j).setZero();
      scale(j) = 1.0;
    } else {
      scale(j) = sd;
      z.col(j) /= sd;
    }
  }
  const double y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::MatrixXd gram = (z.transpose() * z) / static_cast<double>(n);
  const Eigen::VectorXd rhs = (z.transpose() * yc) / static_cast<double>(n);

  LeastSquaresFit fit;
  Eigen::VectorXd beta_std;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (p > 0 && llt.info() == Eigen::Success && llt.rcond() > 1e-12) {
    beta_std = llt.solve(rhs);
  } else {
    gram.diagonal().array() += kRidgeLambda;
    beta_std = gram.ldlt().solve(rhs);
    fit.ridge = p > 0;
  }

  fit.coefficients = beta_std.array() / scale.transpose().array();
  fit.intercept = y_mean - mean.dot(fit.coefficients);
  const Eigen::VectorXd resid = (y - x * fit.coefficients).array() - fit.intercept;
  fit.mse = resid.squaredNorm() / static_cast<double>(n);
  return fit;
}

const std::vector<std::string>& numeric_feature_names() {
  static const std::vector<std::string> names{"distance_m", "elevation_delta_m", "temp_c",   "humidity_pct",
                                              "visibility_km", "precip_mm",      "wind_ms", "speed_ratio"};
  return names;
}

namespace {

void numeric_features(const EnergySample& s, Eigen::Ref<Eigen::VectorXd> out) {
  out(0) = s.distance_m;
  out(1) = s.elevation_delta_m;
  out(2) = s.temp_c;
  out(3) = s.humidity_pct;
  out(4) = s.visibility_km;
  out(5) = s.precip_mm;
  out(6) = s.wind_ms;
  out(7) = s.speed_ratio;
}

}  // namespace

Eigen::VectorXd encode(const LinearModel& model, const EnergySample& s) {
  const std::size_t numeric = numeric_feature_names().size();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.features.size()));
  if (model.features.size() != numeric + (model.road_classes.empty() ? 0 : model.road_classes.size() - 1)) {
    throw EncodingMismatch("model feature list does not match its road classes");
  }
  numeric_features(s, v.head(static_cast<Eigen::Index>(numeric)));
  auto it = std::find(model.road_classes.begin(), model.road_classes.end(), s.road_class);
  if (it == model.road_classes.end()) throw EncodingMismatch("road class '" + s.road_class + "' unknown to the model");
  const auto k = std::distance(model.road_classes.begin(), it);
  if (k > 0) v(static_cast<Eigen::Index>(numeric + k - 1)) = 1.0;
  return v;
}

LinearModel fit_ols(std::span<const EnergySample> samples) {
  std::set<std::string> classes;
  for (const auto& s : samples) classes.insert(s.road_class);
  LinearModel model;
  model.road_classes.assign(classes.begin(), classes.end());
  model.features = numeric_feature_names();
  for (std::size_t k = 1; k < model.road_classes.size(); ++k) model.features.push_back("road_class=" + model.road_classes[k]);

  const auto p = static_cast<Eigen::Index>(model.features.size());
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (n < p + 1) {
    throw InsufficientSamples("need at least " + std::to_string(p + 1) + " samples, got " + std::to_string(n));
  }
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  bool any_elevation = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = encode(model, samples[i]).transpose();
    y(i) = samples[i].energy_kwh;
    any_elevation = any_elevation || samples[i].elevation_delta_m != 0.0;
  }
  const LeastSquaresFit fit = fit_least_squares(x, y);
  model.coefficients.assign(fit.coefficients.data(), fit.coefficients.data() + p);
  model.intercept = fit.intercept;
  model.mse = fit.mse;
  const Eigen::VectorXd means = x.colwise().mean().transpose();
  model.feature_means.assign(means.data(), means.data() + p);
  model.elevation_missing = !any_elevation;
  return model;
}

double predict(const LinearModel& model, const EnergySample& s) {
  const Eigen::VectorXd v = encode(model, s);
  const Eigen::Map<const Eigen::VectorXd> beta(model.coefficients.data(), static_cast<Eigen::Index>(model.coefficients.size()));
  if (beta.size() != v.size()) throw EncodingMismatch("coefficient count does not match encoded features");
  return model.intercept + beta.dot(v);
}

double predict_trip_energy(const LinearModel& model, std::span<const EnergySample> segments) {
  double total = 0.0;
  for (const auto& s : segments) total += predict(model, s);
  return std::max(0.0, total);
}

json model_to_json(const LinearModel& m) {
  return {{"features", m.features},         {"coefficients", m.coefficients}, {"intercept", m.intercept},
          {"mse", m.mse},                   {"road_classes", m.road_classes}, {"feature_means", m.feature_means},
          {"elevation_missing", m.elevation_missing}};
}

LinearModel model_from_json(const json& j) {
  LinearModel m;
  try {
    m.features = j.at("features").get<std::vector<std::string>>();
    m.coefficients = j.at("coefficients").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.mse = j.value("mse", 0.0);
    m.road_classes = j.value("road_classes", std::vector<std::string>{});
    m.feature_means = j.value("feature_means", std::vector<double>{});
    m.elevation_missing = j.value("elevation_missing", false);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
  if (m.features.size() != m.coefficients.size()) throw EncodingMismatch("model has mismatched feature/coefficient counts");
  return m;
}

LinearModel load_model(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

}  // namespace fleetopt::pipeline
