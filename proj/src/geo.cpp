#include "roadpop/geo.hpp"

#include <algorithm>

namespace roadpop {

double geodesic_m(const LatLon& a, const LatLon& b) {
  const double lat1 = deg_to_rad(a.lat);
  const double lat2 = deg_to_rad(b.lat);
  const double s_dlat = std::sin((lat2 - lat1) * 0.5);
  const double s_dlon = std::sin((deg_to_rad(b.lon) - deg_to_rad(a.lon)) * 0.5);
  const double h = s_dlat * s_dlat + std::cos(lat1) * std::cos(lat2) * s_dlon * s_dlon;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

LatLon offset_m(const LatLon& origin, double north_m, double east_m) {
  const double dlat = rad_to_deg(north_m / kEarthRadiusM);
  const double dlon = rad_to_deg(east_m / (kEarthRadiusM * std::cos(deg_to_rad(origin.lat))));
  return {origin.lat + dlat, origin.lon + dlon};
}

LocalProjection::LocalProjection(const LatLon& center)
    : center_(center),
      lat0_(deg_to_rad(center.lat)),
      lon0_(deg_to_rad(center.lon)),
      sin_lat0_(std::sin(lat0_)),
      cos_lat0_(std::cos(lat0_)) {}

PlanePoint LocalProjection::forward(const LatLon& p) const {
  const double lat = deg_to_rad(p.lat);
  double rho = 0.0;
  return forward(lat, deg_to_rad(p.lon), std::sin(lat), std::cos(lat), rho);
}

PlanePoint LocalProjection::forward(double lat_rad, double lon_rad, double sin_lat, double cos_lat,
                                    double& rho) const {
  const double dlon = lon_rad - lon0_;
  const double s_dlat = std::sin((lat_rad - lat0_) * 0.5);
  const double s_half_dlon = std::sin(dlon * 0.5);
  const double h = s_dlat * s_dlat + cos_lat0_ * cos_lat * s_half_dlon * s_half_dlon;
  rho = 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
  if (rho == 0.0) return {0.0, 0.0};
  // Bearing direction, unnormalised: (east, north).
  const double east = std::sin(dlon) * cos_lat;
  const double north = cos_lat0_ * sin_lat - sin_lat0_ * cos_lat * std::cos(dlon);
  const double norm = std::hypot(east, north);
  if (norm == 0.0) return {0.0, rho};
  return {rho * east / norm, rho * north / norm};
}

LatLon LocalProjection::inverse(const PlanePoint& q) const {
  const double rho = std::hypot(q.x, q.y);
  if (rho == 0.0) return center_;
  const double c = rho / kEarthRadiusM;
  const double sin_c = std::sin(c);
  const double cos_c = std::cos(c);
  const double sin_t = q.x / rho;
  const double cos_t = q.y / rho;
  const double sin_lat = std::clamp(sin_lat0_ * cos_c + cos_lat0_ * sin_c * cos_t, -1.0, 1.0);
  const double lat = std::asin(sin_lat);
  const double lon = lon0_ + std::atan2(sin_t * sin_c * cos_lat0_, cos_c - sin_lat0_ * sin_lat);
  return {rad_to_deg(lat), rad_to_deg(lon)};
}

}  // namespace roadpop
