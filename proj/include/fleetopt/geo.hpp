#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fleetopt::geo {

inline constexpr double kEarthRadiusM = 6371008.8;

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

/// Great-circle distance in meters.
inline double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  const double p1 = deg2rad(lat1);
  const double p2 = deg2rad(lat2);
  const double dp = p2 - p1;
  const double dl = deg2rad(lon2 - lon1);
  const double a = std::sin(dp / 2) * std::sin(dp / 2) + std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

struct XY {
  double x = 0.0;
  double y = 0.0;
};

/// Equirectangular projection around a reference point; local meters. Error
/// stays below 0.1% within a few km of the reference at city latitudes.
class LocalProjection {
 public:
  LocalProjection() = default;
  LocalProjection(double ref_lat, double ref_lon)
      : ref_lat_(ref_lat), ref_lon_(ref_lon), cos_ref_(std::cos(deg2rad(ref_lat))) {}

  XY to_xy(double lat, double lon) const {
    return {deg2rad(lon - ref_lon_) * cos_ref_ * kEarthRadiusM, deg2rad(lat - ref_lat_) * kEarthRadiusM};
  }
  void to_latlon(XY p, double& lat, double& lon) const {
    lat = ref_lat_ + p.y / kEarthRadiusM * 180.0 / std::numbers::pi;
    lon = ref_lon_ + p.x / (kEarthRadiusM * cos_ref_) * 180.0 / std::numbers::pi;
  }

 private:
  double ref_lat_ = 0.0;
  double ref_lon_ = 0.0;
  double cos_ref_ = 1.0;
};

}  // namespace fleetopt::geo
