#pragma once

#include <cmath>
#include <numbers>

namespace roadpop {

/// Mean earth radius used for every distance in the project (spherical model).
inline constexpr double kEarthRadiusM = 6'371'000.0;

struct LatLon {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

inline bool valid_coordinate(const LatLon& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

/// Great-circle distance in meters (haversine).
double geodesic_m(const LatLon& a, const LatLon& b);

/// Moves `origin` by `north_m` / `east_m` meters along the local tangent plane.
/// Accurate at city scale; used for noise injection and fixture building.
LatLon offset_m(const LatLon& origin, double north_m, double east_m);

struct PlanePoint {
  double x = 0.0;  // east, meters
  double y = 0.0;  // north, meters
};

/// Azimuthal equidistant projection centred on a fixed point. Distances from
/// the centre are exact great-circle distances; the plane is used for
/// point-to-polyline projection around a GPS fix.
class LocalProjection {
 public:
  explicit LocalProjection(const LatLon& center);

  PlanePoint forward(const LatLon& p) const;
  /// Forward projection from precomputed radians and cos of latitude; `rho`
  /// receives the great-circle distance from the centre, bit-identical to
  /// geodesic_m(center, p).
  PlanePoint forward(double lat_rad, double lon_rad, double sin_lat, double cos_lat,
                     double& rho) const;
  LatLon inverse(const PlanePoint& q) const;

  const LatLon& center() const { return center_; }

 private:
  LatLon center_;
  double lat0_;
  double lon0_;
  double sin_lat0_;
  double cos_lat0_;
};

}  // namespace roadpop
