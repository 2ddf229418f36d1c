#pragma once

// Message handling for the interactive testbed. One JSON object per message,
// one reply per message. All technique math runs here; the client only sends
// controller deltas and renders what comes back.
//
//   start_session  -> {"session", "layout"}
//   step           -> {"cursor", "diameter_m", "gain"}
//   click          -> {"success", "movement_time_s", "next_layout"}
//   set_params     -> {"ok", "technique"}
//   validate       -> {"gains", "diameters"}
//
// Failures come back as {"error": message} and leave every session intact.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

#include "curvecast/config.hpp"
#include "curvecast/pointer.hpp"
#include "curvecast/tasks.hpp"

namespace curvecast {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Interactive trial state. The controller starts at the user position
/// aimed at the start circle; the cursor starts aligned with it.
struct Session {
  TechniqueConfig technique;
  UserPosition position;
  std::vector<TaskSpec> specs;
  std::mt19937_64 rng;
  TrialLayout layout;
  CursorState cursor;
  double yaw_rad = 0.0;
  double pitch_rad = 0.0;
  double clock_s = 0.0;
  double trial_start_s = 0.0;
  std::mutex mutex;
};

class ProtocolServer {
 public:
  using json = nlohmann::json;

  explicit ProtocolServer(ExperimentPlan base = preset_plan(Preset::Study2))
      : base_(std::move(base)) {}

  /// One NDJSON line in, one line out (no trailing newline).
  std::string handle_line(std::string_view line) {
    json reply;
    try {
      reply = handle(json::parse(line));
    } catch (const json::parse_error& e) {
      reply = error_frame(std::string("malformed JSON: ") + e.what());
    }
    return reply.dump();
  }

  /// Replies to every non-blank line of an NDJSON body.
  std::string handle_body(std::string_view body) {
    std::string out;
    std::size_t begin = 0;
    while (begin <= body.size()) {
      std::size_t end = body.find('\n', begin);
      if (end == std::string_view::npos) end = body.size();
      std::string_view line = body.substr(begin, end - begin);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.find_first_not_of(" \t") != std::string_view::npos) {
        out += handle_line(line);
        out += '\n';
      }
      begin = end + 1;
    }
    return out;
  }

  json handle(const json& msg) {
    try {
      if (!msg.is_object()) throw ProtocolError("message must be a JSON object");
      if (!msg.contains("op") || !msg["op"].is_string()) throw ProtocolError("missing 'op'");
      const std::string op = msg["op"].get<std::string>();
      if (op == "start_session") return start_session(msg);
      if (op == "step") return step_session(msg);
      if (op == "click") return click(msg);
      if (op == "set_params") return set_params(msg);
      if (op == "validate") return validate(msg);
      throw ProtocolError("unknown op '" + op + "'");
    } catch (const ProtocolError& e) {
      return error_frame(e.what());
    } catch (const json::exception& e) {
      return error_frame(std::string("bad field: ") + e.what());
    } catch (const std::exception& e) {
      return error_frame(e.what());
    }
  }

  std::size_t session_count() {
    std::lock_guard lock(sessions_mutex_);
    return sessions_.size();
  }

 private:
  static json error_frame(const std::string& message) { return {{"error", message}}; }

  static json point_json(const SurfacePoint& p) {
    return {{"azimuth_rad", p.azimuth_rad}, {"height_m", p.height_m}};
  }

  static json layout_json(const TrialLayout& l) {
    return {{"start", point_json(l.start)}, {"target", point_json(l.target)},
            {"width_m", l.spec.width_m}, {"amplitude_m", l.spec.amplitude_m}};
  }

  static double number(const json& msg, const char* key, double fallback) {
    if (!msg.contains(key)) return fallback;
    if (!msg[key].is_number()) throw ProtocolError(std::string("'") + key + "' must be a number");
    const double v = msg[key].get<double>();
    if (!std::isfinite(v)) throw ProtocolError(std::string("'") + key + "' must be finite");
    return v;
  }

  TechniqueConfig technique_from(const json& v) const {
    try {
      return detail::read_technique(v, "technique", base_.geom);
    } catch (const ConfigError& e) {
      throw ProtocolError(e.what());
    }
  }

  std::shared_ptr<Session> find(const json& msg) {
    if (!msg.contains("session") || !msg["session"].is_number_integer()) {
      throw ProtocolError("missing or non-integer 'session'");
    }
    const auto id = msg["session"].get<std::int64_t>();
    std::lock_guard lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ProtocolError("unknown session " + std::to_string(id));
    return it->second;
  }

  void next_layout(Session& s) {
    std::uniform_int_distribution<std::size_t> pick(0, s.specs.size() - 1);
    s.layout = generate_layout(s.rng, s.specs[pick(s.rng)], base_.geom);
    s.trial_start_s = s.clock_s;
  }

  json start_session(const json& msg) {
    auto s = std::make_shared<Session>();
    s->technique = msg.contains("technique") ? technique_from(msg["technique"])
                                             : make_technique(TechniqueId::PADISTSIZE, base_.geom);
    s->position.distance_multiple = number(msg, "distance_multiple", 1.0);
    s->position.lateral_offset_m = number(msg, "lateral_offset_m", 0.0);
    s->position.controller_height_m = number(msg, "controller_height_m", 1.0);
    s->specs = base_.specs;
    if (msg.contains("preset")) {
      if (!msg["preset"].is_string()) throw ProtocolError("'preset' must be a string");
      try {
        s->specs = preset_plan(parse_preset(msg["preset"].get<std::string>()), base_.geom).specs;
      } catch (const ConfigError& e) {
        throw ProtocolError(e.what());
      }
    }
    std::uint64_t seed = base_.master_seed;
    if (msg.contains("seed")) {
      if (!msg["seed"].is_number_unsigned()) throw ProtocolError("'seed' must be a non-negative integer");
      seed = msg["seed"].get<std::uint64_t>();
    }

    const WorldVector user = user_world_position(s->position, base_.geom);
    if (std::hypot(user.x(), user.z()) >= base_.geom.radius_m) {
      throw ProtocolError("user position lies outside the display cylinder");
    }

    std::int64_t id;
    {
      std::lock_guard lock(sessions_mutex_);
      id = next_id_++;
    }
    s->rng.seed(derive_seed(seed, {static_cast<std::uint64_t>(id)}));
    next_layout(*s);

    const YawPitch aim = yaw_pitch(look_at(user, surface_to_world(s->layout.start, base_.geom)));
    s->yaw_rad = aim.yaw_rad;
    s->pitch_rad = aim.pitch_rad;
    s->cursor = initial_state({user, orientation_from_yaw_pitch(s->yaw_rad, s->pitch_rad), 0.0},
                              base_.geom);
    s->cursor.diameter_m = cursor_diameter(s->technique, 0.0);
    s->cursor.gain = gain(s->technique, 0.0, s->position.interaction_distance_m(base_.geom), base_.geom);

    {
      std::lock_guard lock(sessions_mutex_);
      sessions_[id] = s;
    }
    return {{"session", id}, {"layout", layout_json(s->layout)}};
  }

  json step_session(const json& msg) {
    auto s = find(msg);
    std::lock_guard lock(s->mutex);
    const double dt = number(msg, "dt_s", 0.0);
    if (!(dt > 0.0)) throw ProtocolError("'dt_s' must be positive");
    double dyaw = 0.0;
    double dpitch = 0.0;
    WorldVector dpos = WorldVector::Zero();
    if (msg.contains("controller_delta")) {
      const json& d = msg["controller_delta"];
      if (!d.is_object()) throw ProtocolError("'controller_delta' must be an object");
      dyaw = number(d, "yaw_rad", 0.0);
      dpitch = number(d, "pitch_rad", 0.0);
      if (d.contains("pos_delta_m")) {
        const json& p = d["pos_delta_m"];
        if (!p.is_array() || p.size() != 3) throw ProtocolError("'pos_delta_m' must be [x, y, z]");
        for (int i = 0; i < 3; ++i) {
          if (!p[i].is_number()) throw ProtocolError("'pos_delta_m' must hold numbers");
          dpos[i] = p[i].get<double>();
        }
      }
    }
    s->yaw_rad += dyaw;
    s->pitch_rad = std::clamp(s->pitch_rad + dpitch, -std::numbers::pi / 2.0, std::numbers::pi / 2.0);
    s->clock_s += dt;
    const ControllerSample next{s->cursor.last_controller.position + dpos,
                                orientation_from_yaw_pitch(s->yaw_rad, s->pitch_rad), s->clock_s};
    s->cursor = step(s->cursor, next, s->technique, s->position, base_.geom);
    return {{"cursor", point_json(s->cursor.surface)},
            {"diameter_m", s->cursor.diameter_m},
            {"gain", s->cursor.gain}};
  }

  json click(const json& msg) {
    auto s = find(msg);
    std::lock_guard lock(s->mutex);
    const bool success = s->cursor.on_display &&
                         hit_test(s->cursor.surface, s->cursor.diameter_m, s->layout, base_.geom,
                                  base_.selection);
    const double mt = s->clock_s - s->trial_start_s;
    next_layout(*s);
    return {{"success", success}, {"movement_time_s", mt}, {"next_layout", layout_json(s->layout)}};
  }

  json set_params(const json& msg) {
    auto s = find(msg);
    std::lock_guard lock(s->mutex);
    for (const auto& [key, unused] : msg.items()) {
      if (key != "op" && key != "session" && key != "technique" && key != "distance_multiple" &&
          key != "lateral_offset_m") {
        throw ProtocolError("set_params: unknown key '" + key + "'");
      }
    }
    // Validate everything before touching the session.
    TechniqueConfig technique = msg.contains("technique") ? technique_from(msg["technique"]) : s->technique;
    UserPosition position = s->position;
    position.distance_multiple = number(msg, "distance_multiple", position.distance_multiple);
    position.lateral_offset_m = number(msg, "lateral_offset_m", position.lateral_offset_m);
    if (!(position.distance_multiple > 0.0)) throw ProtocolError("'distance_multiple' must be positive");
    s->technique = technique;
    s->position = position;
    return {{"ok", true}, {"technique", std::string(to_string(s->technique.id))}};
  }

  /// Gains and diameters for (controller speed m/s, interaction distance m)
  /// pairs, for the session's technique or a named one (PADISTSIZE when
  /// neither is given).
  json validate(const json& msg) {
    TechniqueConfig cfg = make_technique(TechniqueId::PADISTSIZE, base_.geom);
    if (msg.contains("session")) {
      auto s = find(msg);
      std::lock_guard lock(s->mutex);
      cfg = s->technique;
    } else if (msg.contains("technique")) {
      cfg = technique_from(msg["technique"]);
    }
    if (!msg.contains("pairs") || !msg["pairs"].is_array()) throw ProtocolError("'pairs' must be an array");
    json gains = json::array();
    json diameters = json::array();
    for (const auto& pair : msg["pairs"]) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
        throw ProtocolError("each pair must be [speed, distance]");
      }
      const double speed = pair[0].get<double>();
      const double distance = pair[1].get<double>();
      if (!(speed >= 0.0)) throw ProtocolError("speed must be non-negative");
      if (!(distance > 0.0)) throw ProtocolError("distance must be positive");
      gains.push_back(gain(cfg, speed, distance, base_.geom));
      diameters.push_back(cursor_diameter(cfg, speed));
    }
    return {{"gains", gains}, {"diameters", diameters}};
  }

  ExperimentPlan base_;
  std::mutex sessions_mutex_;
  std::map<std::int64_t, std::shared_ptr<Session>> sessions_;
  std::int64_t next_id_ = 1;
};

}  // namespace curvecast
