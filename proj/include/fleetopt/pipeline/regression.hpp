#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "fleetopt/pipeline/samples.hpp"

namespace fleetopt::pipeline {

/// Least-squares fit of y ~ X b + c on a raw design matrix (no intercept column).
struct LeastSquaresFit {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  double mse = 0.0;
  bool ridge = false;  // the ridge fallback was needed
};

inline constexpr double kRidgeLambda = 1e-8;

/// Solves the normal equations on standardized columns; when the Gram matrix is
/// singular a ridge term kRidgeLambda is added.
LeastSquaresFit fit_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Linear energy model over the sample features, road class one-hot encoded
/// against a reference class (the first in sorted order).
struct LinearModel {
  std::vector<std::string> features;     // encoded names, order of coefficients
  std::vector<double> coefficients;
  double intercept = 0.0;
  double mse = 0.0;
  std::vector<std::string> road_classes;  // all known classes; [0] is the reference
  std::vector<double> feature_means;      // training means of the encoded features
  bool elevation_missing = false;         // every training sample had no elevation
};

class InsufficientSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EncodingMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric feature names in encoding order (before the road-class columns).
const std::vector<std::string>& numeric_feature_names();

LinearModel fit_ols(std::span<const EnergySample> samples);

/// Encodes one sample under the model's encoding. Throws EncodingMismatch for
/// an unknown road class.
Eigen::VectorXd encode(const LinearModel& model, const EnergySample& s);

double predict(const LinearModel& model, const EnergySample& s);

/// Sum of per-segment predictions, floored at zero.
double predict_trip_energy(const LinearModel& model, std::span<const EnergySample> segments);

nlohmann::json model_to_json(const LinearModel& m);
LinearModel model_from_json(const nlohmann::json& j);
LinearModel load_model(const std::filesystem::path& path);

}  // namespace fleetopt::pipeline
