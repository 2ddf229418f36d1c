#pragma once

// Cursor state and its per-frame transitions: the relative rotation-delta
// update scaled by the CD gain, and the absolute ray-casting baseline.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Geometry>

#include "curvecast/geometry.hpp"
#include "curvecast/rotation.hpp"
#include "curvecast/transfer.hpp"

namespace curvecast {

struct ControllerSample {
  WorldVector position = WorldVector::Zero();
  Rotation orientation = Rotation::Identity();
  double time_s = 0.0;
};

/// Where the yaw/pitch limits of the relative update are measured.
enum class LimitFrame {
  // Direction of the candidate cursor point seen from the curvature axis at
  // controller height: yaw is the cursor azimuth, pitch its elevation.
  DisplayCenter,
  // Euler angles of the virtual ray orientation itself.
  RayOrientation,
};

struct PointerLimits {
  double yaw_max_rad = std::numbers::pi / 2.0;
  double pitch_max_rad = 70.0 * std::numbers::pi / 180.0;
  LimitFrame frame = LimitFrame::DisplayCenter;
};

struct CursorState {
  Rotation virtual_orientation = Rotation::Identity();
  WorldVector origin = WorldVector::Zero();
  SurfacePoint surface{};
  double diameter_m = kMinCursorDiameter;
  ControllerSample last_controller{};
  bool on_display = true;  // false when the last absolute ray missed
  double gain = 1.0;
  double speed_mps = 0.0;
};

inline double controller_speed(const ControllerSample& prev,
                               const ControllerSample& next) {
  const double dt = next.time_s - prev.time_s;
  if (!(dt > 0.0)) {
    throw std::invalid_argument("controller samples must advance in time");
  }
  return (next.position - prev.position).norm() / dt;
}

/// Cursor with the virtual ray aligned to the controller. Throws if the
/// controller does not point at the display.
inline CursorState initial_state(const ControllerSample& sample,
                                 const DisplayGeometry& geom) {
  CursorState s;
  s.virtual_orientation = sample.orientation.normalized();
  s.origin = sample.position;
  s.last_controller = sample;
  const auto hit = intersect_ray({sample.position, forward(s.virtual_orientation)}, geom);
  if (!hit) {
    throw std::invalid_argument("initial controller pose does not hit the display");
  }
  s.surface = *hit;
  return s;
}

inline CursorState absolute_update(const CursorState& prev,
                                   const ControllerSample& sample,
                                   const DisplayGeometry& geom) {
  CursorState s = prev;
  s.virtual_orientation = sample.orientation.normalized();
  s.origin = sample.position;
  s.last_controller = sample;
  if (const auto hit = intersect_ray({sample.position, forward(s.virtual_orientation)}, geom)) {
    s.surface = *hit;
    s.on_display = true;
  } else {
    s.on_display = false;
  }
  return s;
}

inline CursorState relative_update(const CursorState& state,
                                   const ControllerSample& next, double g,
                                   const DisplayGeometry& geom,
                                   const PointerLimits& limits = {}) {
  if (!(g > 0.0)) {
    throw std::invalid_argument("gain must be positive");
  }
  CursorState s = state;
  s.origin = next.position;
  s.last_controller = next;

  const Rotation delta =
      (next.orientation * state.last_controller.orientation.inverse()).normalized();
  const Eigen::AngleAxisd aa(delta);
  const Rotation& cur = state.virtual_orientation;
  // Scaled rotation about the world-frame delta axis, expressed in the
  // virtual ray's local frame.
  const Rotation candidate =
      (cur * Rotation(Eigen::AngleAxisd(aa.angle() * g, cur.inverse() * aa.axis())))
          .normalized();

  if (const auto hit = intersect_ray({next.position, forward(candidate)}, geom)) {
    const YawPitch yp =
        limits.frame == LimitFrame::RayOrientation
            ? yaw_pitch(candidate)
            : YawPitch{hit->azimuth_rad,
                       std::atan2(hit->height_m - next.position.y(), geom.radius_m)};
    if (std::abs(yp.yaw_rad) <= limits.yaw_max_rad &&
        std::abs(yp.pitch_rad) <= limits.pitch_max_rad) {
      s.virtual_orientation = candidate;
      s.surface = *hit;
      s.on_display = true;
      return s;
    }
  }
  // Rejected: orientation stays, the moved origin re-projects when it can.
  if (const auto hit = intersect_ray({next.position, forward(cur)}, geom)) {
    s.surface = *hit;
  }
  return s;
}

inline CursorState step(const CursorState& state, const ControllerSample& next,
                        const TechniqueConfig& cfg, const UserPosition& pos,
                        const DisplayGeometry& geom,
                        const PointerLimits& limits = {}) {
  const double speed = controller_speed(state.last_controller, next);
  const double g = gain(cfg, speed, pos.interaction_distance_m(geom), geom);
  CursorState s = (cfg.id == TechniqueId::ABSOLUTE)
                      ? absolute_update(state, next, geom)
                      : relative_update(state, next, g, geom, limits);
  s.gain = g;
  s.speed_mps = speed;
  s.diameter_m = cursor_diameter(cfg, speed);
  return s;
}

}  // namespace curvecast
