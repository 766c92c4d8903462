#pragma once

#include <cmath>

namespace micronav::geo {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEarthRadiusM = 6371000.0;  // mean sphere radius
inline constexpr double kLocalFrameMaxRangeM = 5000.0;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// -> [0, 360)
inline double wrap360(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d < 0.0) d += 360.0;
  return d;
}

// -> [-180, 180)
inline double wrap180(double deg) {
  double d = wrap360(deg + 180.0) - 180.0;
  return d;
}

struct GeoPoint {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

struct LocalVec {
  double east_m = 0.0;
  double north_m = 0.0;
};

inline LocalVec operator+(const LocalVec& a, const LocalVec& b) {
  return {a.east_m + b.east_m, a.north_m + b.north_m};
}
inline LocalVec operator-(const LocalVec& a, const LocalVec& b) {
  return {a.east_m - b.east_m, a.north_m - b.north_m};
}
inline LocalVec operator*(const LocalVec& v, double s) {
  return {v.east_m * s, v.north_m * s};
}
inline double dot(const LocalVec& a, const LocalVec& b) {
  return a.east_m * b.east_m + a.north_m * b.north_m;
}
inline double norm(const LocalVec& v) { return std::hypot(v.east_m, v.north_m); }

// heading_deg: 0 = north, clockwise positive, kept in [0, 360)
struct Pose2D {
  LocalVec position;
  double heading_deg = 0.0;
};

// unit vector pointing along a compass heading
inline LocalVec heading_unit(double heading_deg) {
  const double h = deg2rad(heading_deg);
  return {std::sin(h), std::cos(h)};
}

// compass azimuth of a local vector; 0 for the zero vector
inline double azimuth_deg(const LocalVec& v) {
  if (v.east_m == 0.0 && v.north_m == 0.0) return 0.0;
  return wrap360(rad2deg(std::atan2(v.east_m, v.north_m)));
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b);

// Equirectangular tangent-plane projection, valid for block-scale separations.
// Throws std::out_of_range beyond kLocalFrameMaxRangeM.
LocalVec to_local_frame(const GeoPoint& origin, const GeoPoint& p);
GeoPoint from_local_frame(const GeoPoint& origin, const LocalVec& v);

// Along-travel-axis component of (sign_pos - agent_pos): positive while the
// sign is still ahead, negative once the agent has overshot it.
double signed_gap(const LocalVec& sign_pos, const LocalVec& agent_pos,
                  double travel_heading_deg);

}  // namespace micronav::geo
