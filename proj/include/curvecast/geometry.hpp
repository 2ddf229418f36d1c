#pragma once

// Semi-circular display modeled as a vertical cylinder segment.
//
// World frame: origin at the curvature center on the floor, +y up, +z toward
// the middle of the display (the main axis), +x to the right of a user who
// stands on the main axis facing the display. All lengths are meters, all
// angles radians.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace curvecast {

using WorldVector = Eigen::Vector3d;

struct DisplayGeometry {
  double radius_m = 3.27;
  double height_m = 3.0;
  double half_angle_rad = std::numbers::pi / 2.0;
  double floor_height_m = 0.0;

  void validate() const {
    if (!(radius_m > 0.0) || !std::isfinite(radius_m)) {
      throw std::invalid_argument("display radius must be positive");
    }
    if (!(height_m > 0.0) || !std::isfinite(height_m)) {
      throw std::invalid_argument("display height must be positive");
    }
    if (!(half_angle_rad > 0.0) || half_angle_rad > std::numbers::pi) {
      throw std::invalid_argument("display half angle must lie in (0, pi]");
    }
    if (!std::isfinite(floor_height_m)) {
      throw std::invalid_argument("display floor height must be finite");
    }
  }

  double top_m() const { return floor_height_m + height_m; }

  /// Width of the display once the cylinder is developed onto a plane.
  double unrolled_width_m() const { return 2.0 * half_angle_rad * radius_m; }
};

struct SurfacePoint {
  double azimuth_rad = 0.0;
  double height_m = 0.0;

  friend bool operator==(const SurfacePoint&, const SurfacePoint&) = default;
};

struct UserPosition {
  double distance_multiple = 1.0;
  double lateral_offset_m = 0.0;
  double controller_height_m = 1.0;

  /// Perpendicular distance from the display center along the main axis.
  double interaction_distance_m(const DisplayGeometry& geom) const {
    return distance_multiple * geom.radius_m;
  }
};

struct Ray {
  WorldVector origin = WorldVector::Zero();
  WorldVector direction = WorldVector::UnitZ();
};

inline bool in_bounds(const SurfacePoint& p, const DisplayGeometry& geom,
                      double slack = 1e-12) {
  return std::abs(p.azimuth_rad) <= geom.half_angle_rad + slack &&
         p.height_m >= geom.floor_height_m - slack &&
         p.height_m <= geom.top_m() + slack;
}

inline WorldVector user_world_position(const UserPosition& pos,
                                       const DisplayGeometry& geom) {
  if (!(pos.distance_multiple > 0.0)) {
    throw std::invalid_argument("distance multiple must be positive");
  }
  return {pos.lateral_offset_m, pos.controller_height_m,
          (1.0 - pos.distance_multiple) * geom.radius_m};
}

inline WorldVector surface_to_world(const SurfacePoint& p,
                                    const DisplayGeometry& geom) {
  if (!in_bounds(p, geom)) {
    throw std::out_of_range("surface point outside display bounds");
  }
  return {geom.radius_m * std::sin(p.azimuth_rad), p.height_m,
          geom.radius_m * std::cos(p.azimuth_rad)};
}

/// Nearest forward hit of `ray` on the infinite cylinder of radius `radius_m`
/// around the y axis, with no angular or vertical limits.
inline std::optional<SurfacePoint> intersect_cylinder(const Ray& ray, double radius_m) {
  const WorldVector& o = ray.origin;
  const WorldVector& d = ray.direction;
  const double a = d.x() * d.x() + d.z() * d.z();
  if (a < 1e-15) {
    return std::nullopt;
  }
  const double half_b = o.x() * d.x() + o.z() * d.z();
  const double c = o.x() * o.x() + o.z() * o.z() - radius_m * radius_m;
  const double disc = half_b * half_b - a * c;
  if (disc < 0.0) {
    return std::nullopt;
  }
  const double root = std::sqrt(disc);
  // Citardauq form for the smaller root avoids cancellation.
  const double q = -(half_b + std::copysign(root, half_b));
  double t0 = q / a;
  double t1 = (q != 0.0) ? c / q : t0;
  if (t0 > t1) {
    std::swap(t0, t1);
  }
  const double t = (t0 > 0.0) ? t0 : t1;
  if (!(t > 0.0)) {
    return std::nullopt;
  }
  const WorldVector hit = o + t * d;
  return SurfacePoint{std::atan2(hit.x(), hit.z()), hit.y()};
}

/// Nearest forward hit of `ray` on the display. A hit outside the angular or
/// vertical extent, a ray with no horizontal component, or no positive root
/// all count as a miss.
inline std::optional<SurfacePoint> intersect_ray(const Ray& ray,
                                                 const DisplayGeometry& geom) {
  const auto p = intersect_cylinder(ray, geom.radius_m);
  if (!p || !in_bounds(*p, geom, 0.0)) {
    return std::nullopt;
  }
  return p;
}

/// Distance on the developed (unrolled) surface.
inline double geodesic_distance(const SurfacePoint& a, const SurfacePoint& b,
                                const DisplayGeometry& geom) {
  return std::hypot(geom.radius_m * (a.azimuth_rad - b.azimuth_rad),
                    a.height_m - b.height_m);
}

/// Unrolled-plane coordinates: horizontal arc length from the display
/// center and height.
inline Eigen::Vector2d unrolled(const SurfacePoint& p,
                                const DisplayGeometry& geom) {
  return {geom.radius_m * p.azimuth_rad, p.height_m};
}

inline SurfacePoint from_unrolled(const Eigen::Vector2d& u,
                                  const DisplayGeometry& geom) {
  return {u.x() / geom.radius_m, u.y()};
}

}  // namespace curvecast
