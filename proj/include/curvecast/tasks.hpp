#pragma once

// Fitts-law trial layouts on the unrolled display, selection semantics and
// index-of-difficulty arithmetic.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "curvecast/geometry.hpp"

namespace curvecast {

inline constexpr double kStartCircleDiameter = 0.20;

struct TaskSpec {
  double amplitude_m = 2.5;
  double width_m = 0.20;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct TrialLayout {
  SurfacePoint start{};
  SurfacePoint target{};
  TaskSpec spec{};
};

enum class SelectionRule {
  Overlap,  // cursor disc touches the target disc
  Center,   // cursor center inside the target disc
};

inline std::string_view to_string(SelectionRule r) {
  return r == SelectionRule::Overlap ? "overlap" : "center";
}

inline SelectionRule parse_selection_rule(std::string_view s) {
  if (s == "overlap") return SelectionRule::Overlap;
  if (s == "center") return SelectionRule::Center;
  throw std::invalid_argument("unknown selection rule '" + std::string(s) + "'");
}

/// Shannon index of difficulty in bits.
inline double fitts_id(double amplitude_m, double width_m) {
  if (!(width_m > 0.0) || amplitude_m < 0.0) {
    throw std::invalid_argument("fitts_id needs width > 0 and amplitude >= 0");
  }
  return std::log2(amplitude_m / width_m + 1.0);
}

inline bool hit_test(const SurfacePoint& cursor, double cursor_diameter_m,
                     const TrialLayout& layout, const DisplayGeometry& geom,
                     SelectionRule rule = SelectionRule::Overlap) {
  const double d = geodesic_distance(cursor, layout.target, geom);
  const double reach = rule == SelectionRule::Overlap
                           ? 0.5 * (layout.spec.width_m + cursor_diameter_m)
                           : 0.5 * layout.spec.width_m;
  return d <= reach;
}

namespace detail {

/// Axis-aligned rectangle of admissible disc centers on the unrolled plane
/// (x measured from the left edge).
struct CenterBox {
  double x0, x1, y0, y1;

  bool empty() const { return x0 > x1 || y0 > y1; }
  bool contains(const Eigen::Vector2d& p) const {
    return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1;
  }
};

inline CenterBox center_box(double diameter, const DisplayGeometry& geom) {
  const double r = 0.5 * diameter;
  return {r, geom.unrolled_width_m() - r, geom.floor_height_m + r,
          geom.top_m() - r};
}

inline double farthest_distance(const Eigen::Vector2d& p, const CenterBox& b) {
  const double dx = std::max(std::abs(p.x() - b.x0), std::abs(p.x() - b.x1));
  const double dy = std::max(std::abs(p.y() - b.y0), std::abs(p.y() - b.y1));
  return std::hypot(dx, dy);
}

inline double nearest_distance(const Eigen::Vector2d& p, const CenterBox& b) {
  const double dx = std::max({b.x0 - p.x(), 0.0, p.x() - b.x1});
  const double dy = std::max({b.y0 - p.y(), 0.0, p.y() - b.y1});
  return std::hypot(dx, dy);
}

inline SurfacePoint to_surface(const Eigen::Vector2d& p,
                               const DisplayGeometry& geom) {
  return {p.x() / geom.radius_m - geom.half_angle_rad, p.y()};
}

}  // namespace detail

/// Whether both discs fit and some placement realizes the amplitude.
inline bool layout_feasible(const TaskSpec& spec, const DisplayGeometry& geom) {
  if (!(spec.width_m > 0.0) || spec.amplitude_m < 0.0) return false;
  const auto sb = detail::center_box(kStartCircleDiameter, geom);
  const auto tb = detail::center_box(spec.width_m, geom);
  if (sb.empty() || tb.empty()) return false;
  // The farthest pair of admissible centers sits at opposite corners.
  double reach = 0.0;
  for (double sx : {sb.x0, sb.x1}) {
    for (double sy : {sb.y0, sb.y1}) {
      reach = std::max(reach, detail::farthest_distance({sx, sy}, tb));
    }
  }
  return spec.amplitude_m <= reach;
}

template <class Rng>
TrialLayout generate_layout(Rng& rng, const TaskSpec& spec,
                            const DisplayGeometry& geom) {
  if (!layout_feasible(spec, geom)) {
    throw std::invalid_argument(
        "task with amplitude " + std::to_string(spec.amplitude_m) +
        " m and width " + std::to_string(spec.width_m) +
        " m does not fit on the display");
  }
  const auto sb = detail::center_box(kStartCircleDiameter, geom);
  const auto tb = detail::center_box(spec.width_m, geom);
  std::uniform_real_distribution<double> ux(sb.x0, sb.x1);
  std::uniform_real_distribution<double> uy(sb.y0, sb.y1);
  std::uniform_real_distribution<double> uang(-std::numbers::pi, std::numbers::pi);

  constexpr int kDirectionTries = 256;
  constexpr int kStartTries = 1'000'000;
  for (int attempt = 0; attempt < kStartTries; ++attempt) {
    const Eigen::Vector2d start{ux(rng), uy(rng)};
    const double a = spec.amplitude_m;
    // The circle of radius A around `start` must reach the target box.
    if (detail::farthest_distance(start, tb) < a ||
        detail::nearest_distance(start, tb) > a) {
      continue;
    }
    for (int i = 0; i < kDirectionTries; ++i) {
      const double phi = uang(rng);
      const Eigen::Vector2d target = start + a * Eigen::Vector2d{std::cos(phi), std::sin(phi)};
      if (tb.contains(target)) {
        return {detail::to_surface(start, geom), detail::to_surface(target, geom), spec};
      }
    }
  }
  throw std::runtime_error("layout sampling did not converge; amplitude is at the feasibility limit");
}

/// Study 1: A in {2.5, 5, 7.5} m crossed with W in {0.20, 0.70} m.
inline std::vector<TaskSpec> study1_specs() {
  std::vector<TaskSpec> out;
  for (double a : {2.5, 5.0, 7.5}) {
    for (double w : {0.20, 0.70}) out.push_back({a, w});
  }
  return out;
}

/// Study 2: A in {2.5, 7.5} m, W = 0.10 m.
inline std::vector<TaskSpec> study2_specs() { return {{2.5, 0.10}, {7.5, 0.10}}; }

}  // namespace curvecast
