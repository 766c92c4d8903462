#include "micronav/geo.hpp"

#include <stdexcept>
#include <string>

namespace micronav::geo {

double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
  const double lat1 = deg2rad(a.lat_deg);
  const double lat2 = deg2rad(b.lat_deg);
  const double dlat = lat2 - lat1;
  const double dlon = deg2rad(b.lon_deg - a.lon_deg);

  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  const double c = 2.0 * std::asin(std::min(1.0, std::sqrt(h)));
  return kEarthRadiusM * c;
}

LocalVec to_local_frame(const GeoPoint& origin, const GeoPoint& p) {
  const double sep = haversine_distance(origin, p);
  if (sep > kLocalFrameMaxRangeM) {
    throw std::out_of_range("to_local_frame: separation " + std::to_string(sep) +
                            " m exceeds local-frame validity range");
  }
  const double east = kEarthRadiusM * std::cos(deg2rad(origin.lat_deg)) *
                      deg2rad(p.lon_deg - origin.lon_deg);
  const double north = kEarthRadiusM * deg2rad(p.lat_deg - origin.lat_deg);
  return {east, north};
}

GeoPoint from_local_frame(const GeoPoint& origin, const LocalVec& v) {
  if (norm(v) > kLocalFrameMaxRangeM) {
    throw std::out_of_range("from_local_frame: offset exceeds local-frame validity range");
  }
  const double lat = origin.lat_deg + rad2deg(v.north_m / kEarthRadiusM);
  const double lon = origin.lon_deg +
                     rad2deg(v.east_m / (kEarthRadiusM * std::cos(deg2rad(origin.lat_deg))));
  return {lat, lon};
}

double signed_gap(const LocalVec& sign_pos, const LocalVec& agent_pos,
                  double travel_heading_deg) {
  return dot(sign_pos - agent_pos, heading_unit(travel_heading_deg));
}

}  // namespace micronav::geo
