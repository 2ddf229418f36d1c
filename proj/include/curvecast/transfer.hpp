#pragma once

// Control-display gain and cursor-size transfer functions for the six cursor
// enhancement techniques plus the absolute ray-casting baseline.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "curvecast/geometry.hpp"

namespace curvecast {

inline constexpr double kMinCursorDiameter = 0.025;
inline constexpr double kMaxCursorDiameter = 0.20;

/// Logistic map from an input (controller speed or distance) to an output
/// range. A negative `lambda` yields a curve that decreases in its input.
struct SigmoidParams {
  double out_max = 1.2;
  double out_min = 0.8;
  double lambda = 20.0;
  double v_max = 1.0;
  double v_min = 0.1;
  double r_inf = 0.5;

  void validate(std::string_view what) const {
    auto fail = [&](const char* msg) {
      throw std::invalid_argument(std::string(what) + ": " + msg);
    };
    if (!std::isfinite(out_max) || !std::isfinite(out_min) ||
        !std::isfinite(lambda) || !std::isfinite(v_max) ||
        !std::isfinite(v_min) || !std::isfinite(r_inf)) {
      fail("non-finite parameter");
    }
    if (!(v_max > v_min)) fail("v_max must exceed v_min");
    if (r_inf < 0.0 || r_inf > 1.0) fail("r_inf must lie in [0, 1]");
  }
};

struct DistanceAdjust {
  double a = 0.2;
  double cd_max_bar = 1.2;
  double cd_min_bar = 0.8;

  void validate() const {
    if (!(cd_max_bar > cd_min_bar)) {
      throw std::invalid_argument("distance_adjust: cd_max_bar must exceed cd_min_bar");
    }
    // The smallest bound is reached at the far end of the scaled range.
    if (!(cd_min_bar - std::max(a, 0.0) > 0.0)) {
      throw std::invalid_argument("distance_adjust: adjusted gains must stay positive");
    }
  }
};

enum class TechniqueId { PA, PASIZE, PBA, PBASIZE, PADIST, PADISTSIZE, ABSOLUTE };

inline constexpr std::array<TechniqueId, 6> kEnhancedTechniques = {
    TechniqueId::PA,  TechniqueId::PBA,    TechniqueId::PADIST,
    TechniqueId::PASIZE, TechniqueId::PBASIZE, TechniqueId::PADISTSIZE};

inline constexpr std::string_view to_string(TechniqueId id) {
  switch (id) {
    case TechniqueId::PA: return "PA";
    case TechniqueId::PASIZE: return "PASIZE";
    case TechniqueId::PBA: return "PBA";
    case TechniqueId::PBASIZE: return "PBASIZE";
    case TechniqueId::PADIST: return "PADIST";
    case TechniqueId::PADISTSIZE: return "PADISTSIZE";
    case TechniqueId::ABSOLUTE: return "ABSOLUTE";
  }
  return "?";
}

inline TechniqueId parse_technique(std::string_view name) {
  for (auto id : {TechniqueId::PA, TechniqueId::PASIZE, TechniqueId::PBA,
                  TechniqueId::PBASIZE, TechniqueId::PADIST,
                  TechniqueId::PADISTSIZE, TechniqueId::ABSOLUTE}) {
    if (to_string(id) == name) return id;
  }
  throw std::invalid_argument("unknown technique '" + std::string(name) + "'");
}

inline constexpr bool has_enlargement(TechniqueId id) {
  return id == TechniqueId::PASIZE || id == TechniqueId::PBASIZE ||
         id == TechniqueId::PADISTSIZE;
}

/// The motor-space technique a size variant is built on (identity otherwise).
inline constexpr TechniqueId base_technique(TechniqueId id) {
  switch (id) {
    case TechniqueId::PASIZE: return TechniqueId::PA;
    case TechniqueId::PBASIZE: return TechniqueId::PBA;
    case TechniqueId::PADISTSIZE: return TechniqueId::PADIST;
    default: return id;
  }
}

struct TechniqueConfig {
  TechniqueId id = TechniqueId::ABSOLUTE;
  SigmoidParams gain_sigmoid{};
  SigmoidParams distance_sigmoid{};
  DistanceAdjust distance_adjust{};
  std::optional<SigmoidParams> size_sigmoid{};

  void validate() const {
    gain_sigmoid.validate("gain_sigmoid");
    distance_sigmoid.validate("distance_sigmoid");
    distance_adjust.validate();
    if (size_sigmoid.has_value() != has_enlargement(id)) {
      throw std::invalid_argument(
          "size_sigmoid must be present exactly for the SIZE techniques");
    }
    if (size_sigmoid) size_sigmoid->validate("size_sigmoid");
    if (!(gain_sigmoid.out_min > 0.0) || !(distance_sigmoid.out_min > 0.0)) {
      throw std::invalid_argument("gain bounds must be positive");
    }
  }
};

/// Defaults for the distance-driven gain: range [0.7, 4.5], inflection at R
/// (input bounds 0.5R..1.5R), decreasing with slope 20/R.
inline SigmoidParams default_distance_sigmoid(const DisplayGeometry& geom) {
  return {4.5, 0.7, -20.0 / geom.radius_m, 1.5 * geom.radius_m,
          0.5 * geom.radius_m, 0.5};
}

inline SigmoidParams default_size_sigmoid() {
  return {kMaxCursorDiameter, kMinCursorDiameter, 20.0, 1.0, 0.1, 0.5};
}

inline TechniqueConfig make_technique(TechniqueId id,
                                      const DisplayGeometry& geom = {}) {
  TechniqueConfig cfg;
  cfg.id = id;
  cfg.distance_sigmoid = default_distance_sigmoid(geom);
  if (has_enlargement(id)) cfg.size_sigmoid = default_size_sigmoid();
  return cfg;
}

inline double inflection(const SigmoidParams& p) {
  return p.r_inf * (p.v_max - p.v_min) + p.v_min;
}

inline double sigmoid_map(double x, const SigmoidParams& p) {
  const double z = std::clamp(-p.lambda * (x - inflection(p)), -700.0, 700.0);
  return (p.out_max - p.out_min) / (1.0 + std::exp(z)) + p.out_min;
}

/// Interaction distance rescaled so that 0.5R -> 0, R -> 0.5, 1.5R -> 1,
/// clamped to [0, 1].
inline double scaled_distance(double distance_m, const DisplayGeometry& geom) {
  if (!(distance_m > 0.0)) {
    throw std::invalid_argument("interaction distance must be positive");
  }
  return std::clamp(distance_m / geom.radius_m - 0.5, 0.0, 1.0);
}

struct GainBounds {
  double cd_max;
  double cd_min;
};

inline GainBounds distance_bounds(double d_s, const DistanceAdjust& adj) {
  return {adj.cd_max_bar - adj.a * d_s, adj.cd_min_bar - adj.a * d_s};
}

inline double gain(const TechniqueConfig& cfg, double controller_speed_mps,
                   double interaction_distance_m, const DisplayGeometry& geom) {
  switch (base_technique(cfg.id)) {
    case TechniqueId::ABSOLUTE:
      return 1.0;
    case TechniqueId::PA:
      return sigmoid_map(controller_speed_mps, cfg.gain_sigmoid);
    case TechniqueId::PBA:
      return sigmoid_map(interaction_distance_m, cfg.distance_sigmoid);
    case TechniqueId::PADIST: {
      const auto bounds = distance_bounds(
          scaled_distance(interaction_distance_m, geom), cfg.distance_adjust);
      SigmoidParams p = cfg.gain_sigmoid;
      p.out_max = bounds.cd_max;
      p.out_min = bounds.cd_min;
      return sigmoid_map(controller_speed_mps, p);
    }
    default:
      break;
  }
  throw std::logic_error("unhandled technique");
}

inline double cursor_diameter(const TechniqueConfig& cfg,
                              double controller_speed_mps) {
  if (cfg.size_sigmoid) {
    return sigmoid_map(controller_speed_mps, *cfg.size_sigmoid);
  }
  return kMinCursorDiameter;
}

}  // namespace curvecast
