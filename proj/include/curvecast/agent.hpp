#pragma once

// Synthetic pointing agent. It stands in for a study participant and emits a
// 90 Hz controller pose stream toward each target:
//
//   reaction -> ballistic submovement -> (pause -> corrective submovement)*
//            -> dwell -> click
//
// Submovements follow a minimum-jerk angular profile with multiplicative
// extent noise and a proportional lateral error. Tremor is low-pass filtered
// Gaussian angular noise on the controller orientation, so its surface
// footprint grows with the distance to the display. The agent sees the cursor
// one tick late and judges overlap with the visible cursor disc. Once a
// submovement is past its velocity peak it may click on the fly if the
// cursor, extrapolated two ticks ahead, stays well inside the target.
//
// Controller position: the controller sits at the end of a lever that pivots
// behind the user position, so voluntary hand rotation also translates the
// controller and produces the positional speed the speed-driven techniques
// read. Tremor and click jitter act at the wrist and only turn it. With the
// hand pointing straight ahead the controller is exactly at the user
// position.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Geometry>

#include "curvecast/geometry.hpp"
#include "curvecast/pointer.hpp"
#include "curvecast/rotation.hpp"
#include "curvecast/tasks.hpp"
#include "curvecast/transfer.hpp"

namespace curvecast {

/// Synthetic motor parameters. Nothing here is fitted to human data.
struct AgentParams {
  double peak_angular_speed_radps = 20.0;
  double duration_a0_s = 0.3;
  double duration_b_s_per_rad = 0.1;
  double undershoot_mean = 0.92;
  double undershoot_sd = 0.12;
  double tremor_sd_rad = 0.0026;
  double tremor_smoothing = 0.8;
  int reaction_ticks = 9;
  int dwell_ticks_before_click = 6;
  int max_corrections = 5;
  int correction_latency_ticks = 15;
  double motor_noise_rad = 0.0005;
  double click_jitter_sd_rad = 0.003;
  double wrist_lever_m = 0.6;
  double click_confidence = 0.8;

  void validate() const {
    auto fail = [](const char* msg) { throw std::invalid_argument(std::string("agent: ") + msg); };
    if (!(peak_angular_speed_radps > 0.0)) fail("peak_angular_speed_radps must be positive");
    if (!(duration_a0_s >= 0.0) || !(duration_b_s_per_rad >= 0.0)) fail("duration coefficients must be non-negative");
    if (!(undershoot_mean > 0.0) || undershoot_mean > 1.0) fail("undershoot_mean must lie in (0, 1]");
    if (!(undershoot_sd >= 0.0)) fail("undershoot_sd must be non-negative");
    if (!(tremor_sd_rad >= 0.0)) fail("tremor_sd_rad must be non-negative");
    if (!(tremor_smoothing >= 0.0) || !(tremor_smoothing < 1.0)) fail("tremor_smoothing must lie in [0, 1)");
    if (reaction_ticks < 0 || dwell_ticks_before_click < 1 || max_corrections < 0 ||
        correction_latency_ticks < 0) {
      fail("tick counts must be non-negative (dwell at least 1)");
    }
    if (!(motor_noise_rad >= 0.0)) fail("motor_noise_rad must be non-negative");
    if (!(click_jitter_sd_rad >= 0.0)) fail("click_jitter_sd_rad must be non-negative");
    if (!(wrist_lever_m >= 0.0)) fail("wrist_lever_m must be non-negative");
    if (!(click_confidence > 0.0) || click_confidence > 1.0) fail("click_confidence must lie in (0, 1]");
  }
};

struct SimulationSettings {
  double tick_rate_hz = 90.0;
  double timeout_s = 10.0;
  SelectionRule selection = SelectionRule::Overlap;
  PointerLimits limits{};
};

struct TrialOutcome {
  double movement_time_s = 0.0;
  bool success = false;
  SurfacePoint endpoint{};
  double click_diameter_m = kMinCursorDiameter;
  int tick_count = 0;
  int submovements = 0;
  bool clicked_in_motion = false;
  bool timed_out = false;
};

/// Movement planned to bring the cursor onto a target. The virtual ray is
/// swept linearly in yaw and pitch, which keeps the cursor close to the
/// straight line on the unrolled surface (a great-circle sweep would bow
/// toward the top or bottom edge on long horizontal moves). The hand makes
/// the same world-frame rotation divided by the expected gain.
struct AimPlan {
  double cursor_yaw_rad = 0.0;  // change the virtual ray must make
  double cursor_pitch_rad = 0.0;
  double controller_yaw_rad = 0.0;  // change the hand must make
  double controller_pitch_rad = 0.0;
  double assumed_gain = 1.0;
  double planned_duration_s = 0.0;

  double cursor_angle_rad() const { return std::hypot(cursor_yaw_rad, cursor_pitch_rad); }
  double controller_angle_rad() const {
    return std::hypot(controller_yaw_rad, controller_pitch_rad);
  }
};

inline double submovement_duration(double controller_angle_rad, const AgentParams& p) {
  const double linear = p.duration_a0_s + p.duration_b_s_per_rad * controller_angle_rad;
  // Peak velocity of a minimum-jerk profile is 1.875 * extent / duration.
  const double speed_limited = 1.875 * controller_angle_rad / p.peak_angular_speed_radps;
  return std::max(linear, speed_limited);
}

/// Normalized minimum-jerk position profile.
inline double min_jerk(double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  const double t3 = tau * tau * tau;
  return t3 * (10.0 - 15.0 * tau + 6.0 * tau * tau);
}

/// Plans the hand rotation that turns the virtual ray from its current
/// direction onto the target center. The gain is evaluated at the average
/// positional speed the planned movement would produce; speed and gain depend
/// on each other, so the two are iterated to a fixed point. The plan is made
/// again before every corrective submovement, so residual error from gain
/// variation within a movement is absorbed in closed loop.
inline AimPlan plan_aim_orientation(const CursorState& state, const SurfacePoint& target,
                                    const TechniqueConfig& cfg, const UserPosition& pos,
                                    const DisplayGeometry& geom, const AgentParams& params) {
  AimPlan plan;
  const YawPitch cur = yaw_pitch(state.virtual_orientation);
  const YawPitch want = yaw_pitch(look_at(state.origin, surface_to_world(target, geom)));
  // No wrapping: every aim point lies in front of the user, so the yaw
  // difference never crosses the discontinuity behind them.
  plan.cursor_yaw_rad = want.yaw_rad - cur.yaw_rad;
  plan.cursor_pitch_rad = want.pitch_rad - cur.pitch_rad;

  const double distance = pos.interaction_distance_m(geom);
  const double cursor_angle = plan.cursor_angle_rad();
  double theta = cursor_angle;
  double g = gain(cfg, 0.0, distance, geom);
  if (cursor_angle > 0.0) {
    for (int i = 0; i < 32; ++i) {
      const double duration = submovement_duration(theta, params);
      const double speed = duration > 0.0 ? params.wrist_lever_m * theta / duration : 0.0;
      g = gain(cfg, speed, distance, geom);
      const double next = cursor_angle / g;
      const bool settled = std::abs(next - theta) < 1e-12;
      theta = next;
      if (settled) break;
    }
  }
  plan.assumed_gain = g;
  plan.controller_yaw_rad = plan.cursor_yaw_rad / g;
  plan.controller_pitch_rad = plan.cursor_pitch_rad / g;
  plan.planned_duration_s = submovement_duration(plan.controller_angle_rad(), params);
  return plan;
}

namespace detail {

// Distance from the display border the agent keeps its aim point.
inline constexpr double kEdgeMargin = 0.05;

/// The controller sits at the end of a lever pivoting behind the user
/// position; pointing straight ahead puts it exactly at the user position.
struct Hand {
  WorldVector pivot;
  double lever;

  WorldVector position(const Rotation& q) const { return pivot + lever * forward(q); }

  /// Yaw/pitch whose ray from the resulting controller position passes
  /// through `point`.
  YawPitch aim_at(const WorldVector& point) const {
    Rotation q = look_at(pivot + lever * WorldVector::UnitZ(), point);
    for (int i = 0; i < 32; ++i) q = look_at(position(q), point);
    return yaw_pitch(q);
  }
};

inline Rotation perturb(const Rotation& q, double yaw, double pitch) {
  return (Rotation(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY())) * q *
          Rotation(Eigen::AngleAxisd(-pitch, Eigen::Vector3d::UnitX())))
      .normalized();
}

}  // namespace detail

inline TrialOutcome run_trial(std::uint64_t seed, const AgentParams& params,
                              const TechniqueConfig& cfg, const UserPosition& pos,
                              const TrialLayout& layout, const DisplayGeometry& geom,
                              const SimulationSettings& sim = {}) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  const WorldVector user = user_world_position(pos, geom);
  const detail::Hand hand{user - params.wrist_lever_m * WorldVector::UnitZ(),
                          params.wrist_lever_m};
  const double dt = 1.0 / sim.tick_rate_hz;
  const int timeout_ticks = static_cast<int>(std::lround(sim.timeout_s * sim.tick_rate_hz));

  // The start circle has just been selected: hand and cursor rest on its center.
  const YawPitch start_yp = hand.aim_at(surface_to_world(layout.start, geom));
  Rotation hand_clean = orientation_from_yaw_pitch(start_yp.yaw_rad, start_yp.pitch_rad);
  ControllerSample sample{hand.position(hand_clean), hand_clean, 0.0};
  CursorState state = initial_state(sample, geom);
  state.diameter_m = cursor_diameter(cfg, 0.0);
  state.gain = gain(cfg, 0.0, pos.interaction_distance_m(geom), geom);
  CursorState perceived = state;  // what the agent sees: last tick's cursor
  CursorState perceived_before = state;

  enum class Phase { React, Move, Pause, Dwell };
  Phase phase = Phase::React;
  int remaining = params.reaction_ticks;
  int submovements = 0;
  YawPitch move_from{};  // virtual ray direction at movement onset
  YawPitch move_delta{};
  double move_gain = 1.0;
  int move_ticks = 0;
  int move_k = 0;

  const double smooth = params.tremor_smoothing;
  const double innovation = std::sqrt(1.0 - smooth * smooth) * params.tremor_sd_rad;
  double tremor_yaw = 0.0;
  double tremor_pitch = 0.0;

  // Controller speed the current submovement produces on step `k`.
  auto planned_speed = [&](int k) {
    if (k >= move_ticks) return 0.0;
    const double hand_angle = std::hypot(move_delta.yaw_rad, move_delta.pitch_rad) / move_gain;
    const double ds = min_jerk(static_cast<double>(k + 1) / move_ticks) -
                      min_jerk(static_cast<double>(k) / move_ticks);
    return params.wrist_lever_m * hand_angle * ds * sim.tick_rate_hz;
  };

  auto perceived_hit = [&] {
    return hit_test(perceived.surface, perceived.diameter_m, layout, geom, sim.selection);
  };

  // Clicking on the fly: the agent extrapolates the cursor over the tick the
  // click takes to register and one more, and clicks only if both predicted
  // cursors sit well inside the selection reach, not just touching it.
  auto predicted_hit = [&] {
    if (!perceived_hit()) return false;
    const Eigen::Vector2d now = unrolled(perceived.surface, geom);
    const Eigen::Vector2d velocity = now - unrolled(perceived_before.surface, geom);
    const Eigen::Vector2d target = unrolled(layout.target, geom);
    for (int k = 1; k <= 2; ++k) {
      // The agent knows its own motor command, so it predicts the cursor size
      // from the hand speed it is about to produce.
      const double diameter = cursor_diameter(cfg, planned_speed(move_k + k - 1));
      const double reach = sim.selection == SelectionRule::Overlap
                               ? 0.5 * (layout.spec.width_m + diameter)
                               : 0.5 * layout.spec.width_m;
      if ((now + k * velocity - target).norm() > params.click_confidence * reach) return false;
    }
    return true;
  };

  auto begin_submovement = [&] {
    const AimPlan plan = plan_aim_orientation(perceived, layout.target, cfg, pos, geom, params);
    const double extent = params.undershoot_mean + params.undershoot_sd * unit(rng);
    const double lateral = params.undershoot_sd * unit(rng);
    // Lateral error is perpendicular to the planned direction in yaw/pitch space.
    // Endpoint noise floor lives in hand angles, so the gain amplifies it.
    move_gain = plan.assumed_gain;
    const double floor = params.motor_noise_rad * move_gain;
    move_delta = {extent * plan.cursor_yaw_rad - lateral * plan.cursor_pitch_rad + floor * unit(rng),
                  extent * plan.cursor_pitch_rad + lateral * plan.cursor_yaw_rad + floor * unit(rng)};
    move_from = yaw_pitch(perceived.virtual_orientation);
    // The agent never aims off the screen: a noisy endpoint beyond an edge is
    // pulled back inside so the cursor does not pin against the border.
    {
      const Rotation aim = orientation_from_yaw_pitch(move_from.yaw_rad + move_delta.yaw_rad,
                                                      move_from.pitch_rad + move_delta.pitch_rad);
      if (const auto end = intersect_cylinder({perceived.origin, forward(aim)}, geom.radius_m)) {
        const double m = detail::kEdgeMargin;
        const double az_lim = geom.half_angle_rad - m / geom.radius_m;
        const SurfacePoint inside{std::clamp(end->azimuth_rad, -az_lim, az_lim),
                                  std::clamp(end->height_m, geom.floor_height_m + m, geom.top_m() - m)};
        if (inside.azimuth_rad != end->azimuth_rad || inside.height_m != end->height_m) {
          const YawPitch want = yaw_pitch(look_at(perceived.origin, surface_to_world(inside, geom)));
          move_delta = {want.yaw_rad - move_from.yaw_rad,
                        want.pitch_rad - move_from.pitch_rad};
        }
      }
    }
    const double duration = submovement_duration(
        std::hypot(move_delta.yaw_rad, move_delta.pitch_rad) / move_gain, params);
    move_ticks = std::max(1, static_cast<int>(std::lround(duration * sim.tick_rate_hz)));
    move_k = 0;
    ++submovements;
    phase = Phase::Move;
  };

  auto decide = [&] {
    if (perceived_hit() || submovements > params.max_corrections) {
      phase = Phase::Dwell;
      remaining = params.dwell_ticks_before_click;
    } else {
      begin_submovement();
    }
  };

  TrialOutcome out;
  out.submovements = 0;
  for (int tick = 1; tick <= timeout_ticks; ++tick) {
    perceived_before = perceived;
    perceived = state;
    bool click = false;
    bool in_motion = false;
    bool resolved = false;
    while (!resolved) {
      switch (phase) {
        case Phase::React:
        case Phase::Pause:
          if (remaining > 0) {
            --remaining;
            resolved = true;
          } else {
            decide();
          }
          break;
        case Phase::Move:
          if (move_k < move_ticks) {
            if (2 * move_k >= move_ticks && predicted_hit()) click = in_motion = true;
            const double s0 = min_jerk(static_cast<double>(move_k) / move_ticks);
            ++move_k;
            const double s1 = min_jerk(static_cast<double>(move_k) / move_ticks);
            auto along = [&](double s) {
              return orientation_from_yaw_pitch(move_from.yaw_rad + s * move_delta.yaw_rad,
                                                move_from.pitch_rad + s * move_delta.pitch_rad);
            };
            const Eigen::AngleAxisd step_aa(along(s1) * along(s0).inverse());
            hand_clean = (Rotation(Eigen::AngleAxisd(step_aa.angle() / move_gain, step_aa.axis())) *
                          hand_clean)
                             .normalized();
            resolved = true;
          } else {
            phase = Phase::Pause;
            remaining = params.correction_latency_ticks;
          }
          break;
        case Phase::Dwell:
          // A cursor that drifts off the target during the dwell calls for
          // another correction instead of a click.
          if (!perceived_hit() && submovements <= params.max_corrections) {
            begin_submovement();
            break;
          }
          if (--remaining <= 0) click = true;
          resolved = true;
          break;
      }
    }

    tremor_yaw = smooth * tremor_yaw + innovation * unit(rng);
    tremor_pitch = smooth * tremor_pitch + innovation * unit(rng);
    double yaw = tremor_yaw;
    double pitch = tremor_pitch;
    if (click && params.click_jitter_sd_rad > 0.0) {
      yaw += params.click_jitter_sd_rad * unit(rng);
      pitch += params.click_jitter_sd_rad * unit(rng);
    }
    const Rotation hand_q = detail::perturb(hand_clean, yaw, pitch);
    // Tremor and click jitter act at the wrist: they turn the controller
    // but do not move it along the lever.
    sample = {hand.position(hand_clean), hand_q, tick * dt};
    state = step(state, sample, cfg, pos, geom, sim.limits);

    if (click) {
      out.tick_count = tick;
      out.movement_time_s = tick * dt;
      out.endpoint = state.surface;
      out.click_diameter_m = state.diameter_m;
      out.success = hit_test(state.surface, state.diameter_m, layout, geom, sim.selection);
      out.submovements = submovements;
      out.clicked_in_motion = in_motion;
      return out;
    }
  }
  out.tick_count = timeout_ticks;
  out.movement_time_s = timeout_ticks * dt;
  out.endpoint = state.surface;
  out.click_diameter_m = state.diameter_m;
  out.success = false;
  out.submovements = submovements;
  out.timed_out = true;
  return out;
}

}  // namespace curvecast
