#pragma once

// Orientation helpers. An orientation maps the local forward axis (+z) to the
// pointing direction in the world frame. Yaw turns toward +x about +y, pitch
// raises the forward axis toward +y.

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "curvecast/geometry.hpp"

namespace curvecast {

using Rotation = Eigen::Quaterniond;

struct YawPitch {
  double yaw_rad = 0.0;
  double pitch_rad = 0.0;
};

inline Rotation orientation_from_yaw_pitch(double yaw_rad, double pitch_rad) {
  return Rotation(Eigen::AngleAxisd(yaw_rad, Eigen::Vector3d::UnitY()) *
                  Eigen::AngleAxisd(-pitch_rad, Eigen::Vector3d::UnitX()));
}

inline WorldVector forward(const Rotation& q) {
  return q * WorldVector::UnitZ();
}

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) {
    a += 2.0 * std::numbers::pi;
  }
  return a;
}

/// Yaw-then-pitch decomposition of the forward axis; roll is discarded.
inline YawPitch yaw_pitch(const Rotation& q) {
  const WorldVector f = forward(q).normalized();
  return {wrap_angle(std::atan2(f.x(), f.z())),
          std::asin(std::clamp(f.y(), -1.0, 1.0))};
}

/// Orientation whose forward axis points from `from` to `to`, with no roll.
inline Rotation look_at(const WorldVector& from, const WorldVector& to) {
  const WorldVector d = (to - from).normalized();
  return orientation_from_yaw_pitch(std::atan2(d.x(), d.z()),
                                    std::asin(std::clamp(d.y(), -1.0, 1.0)));
}

/// Rotation by the rotation vector `v` (axis * angle).
inline Rotation from_rotation_vector(const Eigen::Vector3d& v) {
  const double angle = v.norm();
  if (angle < 1e-300) {
    return Rotation::Identity();
  }
  return Rotation(Eigen::AngleAxisd(angle, v / angle));
}

}  // namespace curvecast
