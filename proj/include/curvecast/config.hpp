#pragma once

// JSON experiment configuration. Parsing is strict: a key the schema does
// not know is an error. Any length `foo_m` may be given as `foo_cm` instead.
// Anything left out keeps its default, and the defaults are the published
// setups.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "json.hpp"

#include "curvecast/experiment.hpp"

namespace curvecast {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Preset { Study1, Study2 };

inline Preset parse_preset(std::string_view s) {
  if (s == "study1") return Preset::Study1;
  if (s == "study2") return Preset::Study2;
  throw ConfigError("unknown preset '" + std::string(s) + "' (expected study1 or study2)");
}

/// Interaction distances 0.5R, R, 1.5R crossed with lateral offsets 0 and -R/2.
inline std::vector<UserPosition> study_positions(const DisplayGeometry& geom) {
  std::vector<UserPosition> out;
  for (double d : {0.5, 1.0, 1.5}) {
    for (double off : {0.0, -geom.radius_m / 2.0}) out.push_back({d, off, 1.0});
  }
  return out;
}

/// Study 1: the plain ray cast, 360 trials per participant.
/// Study 2: the six enhanced techniques, 720 trials per participant.
inline ExperimentPlan preset_plan(Preset preset, const DisplayGeometry& geom = {}) {
  ExperimentPlan plan;
  plan.geom = geom;
  plan.positions = study_positions(geom);
  plan.repetitions = 10;
  plan.virtual_participants = 12;
  if (preset == Preset::Study1) {
    plan.techniques = {make_technique(TechniqueId::ABSOLUTE, geom)};
    plan.specs = study1_specs();
  } else {
    for (auto id : kEnhancedTechniques) plan.techniques.push_back(make_technique(id, geom));
    plan.specs = study2_specs();
  }
  return plan;
}

namespace detail {

using nlohmann::json;

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string child(const char* key) const { return path_ + "." + key; }

  void num(const char* key, double& out) {
    seen_.emplace_back(key);
    const std::string k(key);
    if (k.size() > 2 && k.ends_with("_m")) {
      const std::string cm = k.substr(0, k.size() - 2) + "_cm";
      seen_.push_back(cm);
      if (j_.contains(cm)) {
        if (j_.contains(k)) throw ConfigError(path_ + ": give either '" + k + "' or '" + cm + "', not both");
        out = number_at(cm) / 100.0;
        return;
      }
    }
    if (j_.contains(k)) out = number_at(k);
  }

  template <class Int>
  void integer(const char* key, Int& out) {
    seen_.emplace_back(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(child(key) + ": expected an integer");
    if (v.is_number_unsigned()) {
      out = static_cast<Int>(v.get<std::uint64_t>());
    } else {
      const auto s = v.get<std::int64_t>();
      if constexpr (std::is_unsigned_v<Int>) {
        if (s < 0) throw ConfigError(child(key) + ": must be non-negative");
      }
      out = static_cast<Int>(s);
    }
  }

  void boolean(const char* key, bool& out) {
    seen_.emplace_back(key);
    if (!j_.contains(key)) return;
    if (!j_.at(key).is_boolean()) throw ConfigError(child(key) + ": expected true or false");
    out = j_.at(key).get<bool>();
  }

  void text(const char* key, std::string& out) {
    seen_.emplace_back(key);
    if (!j_.contains(key)) return;
    if (!j_.at(key).is_string()) throw ConfigError(child(key) + ": expected a string");
    out = j_.at(key).get<std::string>();
  }

  /// Claims a key that the caller parses itself.
  bool take(const char* key) {
    seen_.emplace_back(key);
    return j_.contains(key);
  }

  void finish() const {
    for (const auto& [key, unused] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        throw ConfigError(path_ + ": unknown key '" + key + "'");
      }
    }
  }

 private:
  double number_at(const std::string& key) const {
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(path_ + "." + key + ": expected a number");
    const double out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(path_ + "." + key + ": not finite");
    return out;
  }

  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

inline void read_sigmoid(const json& j, const std::string& path, SigmoidParams& p) {
  ObjectReader r(j, path);
  r.num("out_max", p.out_max);
  r.num("out_min", p.out_min);
  r.num("lambda", p.lambda);
  r.num("v_max", p.v_max);
  r.num("v_min", p.v_min);
  r.num("r_inf", p.r_inf);
  r.finish();
}

inline TechniqueConfig read_technique(const json& j, const std::string& path,
                                      const DisplayGeometry& geom) {
  auto parse_id = [&](const std::string& name) {
    try {
      return parse_technique(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path + ": " + e.what());
    }
  };
  if (j.is_string()) return make_technique(parse_id(j.get<std::string>()), geom);

  ObjectReader r(j, path);
  std::string id;
  r.text("id", id);
  if (id.empty()) throw ConfigError(path + ": technique object needs an 'id'");
  TechniqueConfig cfg = make_technique(parse_id(id), geom);
  if (r.take("gain_sigmoid")) read_sigmoid(r.at("gain_sigmoid"), r.child("gain_sigmoid"), cfg.gain_sigmoid);
  if (r.take("distance_sigmoid")) {
    read_sigmoid(r.at("distance_sigmoid"), r.child("distance_sigmoid"), cfg.distance_sigmoid);
  }
  if (r.take("distance_adjust")) {
    ObjectReader a(r.at("distance_adjust"), r.child("distance_adjust"));
    a.num("a", cfg.distance_adjust.a);
    a.num("cd_max_bar", cfg.distance_adjust.cd_max_bar);
    a.num("cd_min_bar", cfg.distance_adjust.cd_min_bar);
    a.finish();
  }
  if (r.take("size_sigmoid")) {
    if (!cfg.size_sigmoid) throw ConfigError(r.child("size_sigmoid") + ": " + id + " does not enlarge the cursor");
    read_sigmoid(r.at("size_sigmoid"), r.child("size_sigmoid"), *cfg.size_sigmoid);
  }
  r.finish();
  return cfg;
}

inline void read_agent(const json& j, const std::string& path, AgentParams& a) {
  ObjectReader r(j, path);
  r.num("peak_angular_speed_radps", a.peak_angular_speed_radps);
  r.num("duration_a0_s", a.duration_a0_s);
  r.num("duration_b_s_per_rad", a.duration_b_s_per_rad);
  r.num("undershoot_mean", a.undershoot_mean);
  r.num("undershoot_sd", a.undershoot_sd);
  r.num("tremor_sd_rad", a.tremor_sd_rad);
  r.num("tremor_smoothing", a.tremor_smoothing);
  r.integer("reaction_ticks", a.reaction_ticks);
  r.integer("dwell_ticks_before_click", a.dwell_ticks_before_click);
  r.integer("max_corrections", a.max_corrections);
  r.integer("correction_latency_ticks", a.correction_latency_ticks);
  r.num("motor_noise_rad", a.motor_noise_rad);
  r.num("click_jitter_sd_rad", a.click_jitter_sd_rad);
  r.num("wrist_lever_m", a.wrist_lever_m);
  r.num("click_confidence", a.click_confidence);
  r.finish();
}

inline DisplayGeometry read_display(const json& j, const std::string& path) {
  DisplayGeometry g;
  ObjectReader r(j, path);
  r.num("radius_m", g.radius_m);
  r.num("height_m", g.height_m);
  double half_angle_deg = g.half_angle_rad * 180.0 / std::numbers::pi;
  r.num("half_angle_deg", half_angle_deg);
  g.half_angle_rad = half_angle_deg * std::numbers::pi / 180.0;
  r.num("floor_height_m", g.floor_height_m);
  r.finish();
  return g;
}

}  // namespace detail

/// Builds a plan from a JSON document. `preset` (in the document or from
/// the caller) picks the starting point; the document then overrides it.
inline ExperimentPlan plan_from_json(const nlohmann::json& doc,
                                     std::optional<Preset> preset_override = std::nullopt) {
  using detail::ObjectReader;
  ObjectReader r(doc, "config");

  DisplayGeometry geom;
  if (r.take("display")) geom = detail::read_display(r.at("display"), r.child("display"));
  try {
    geom.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config.display: ") + e.what());
  }

  std::string preset_name = "study2";
  r.text("preset", preset_name);
  const Preset preset = preset_override.value_or(parse_preset(preset_name));
  ExperimentPlan plan = preset_plan(preset, geom);

  if (r.take("techniques")) {
    const auto& arr = r.at("techniques");
    if (!arr.is_array()) throw ConfigError("config.techniques: expected an array");
    plan.techniques.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      plan.techniques.push_back(
          detail::read_technique(arr[i], "config.techniques[" + std::to_string(i) + "]", geom));
    }
  }
  if (r.take("positions")) {
    const auto& arr = r.at("positions");
    if (!arr.is_array()) throw ConfigError("config.positions: expected an array");
    plan.positions.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      UserPosition p;
      ObjectReader pr(arr[i], "config.positions[" + std::to_string(i) + "]");
      pr.num("distance_multiple", p.distance_multiple);
      pr.num("lateral_offset_m", p.lateral_offset_m);
      pr.num("controller_height_m", p.controller_height_m);
      pr.finish();
      plan.positions.push_back(p);
    }
  }
  if (r.take("specs")) {
    const auto& arr = r.at("specs");
    if (!arr.is_array()) throw ConfigError("config.specs: expected an array");
    plan.specs.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      TaskSpec s;
      ObjectReader sr(arr[i], "config.specs[" + std::to_string(i) + "]");
      sr.num("amplitude_m", s.amplitude_m);
      sr.num("width_m", s.width_m);
      sr.finish();
      plan.specs.push_back(s);
    }
  }
  r.integer("repetitions", plan.repetitions);
  r.integer("virtual_participants", plan.virtual_participants);
  r.integer("master_seed", plan.master_seed);
  r.num("tick_rate_hz", plan.tick_rate_hz);
  std::string selection(to_string(plan.selection));
  r.text("selection", selection);
  try {
    plan.selection = parse_selection_rule(selection);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config.selection: ") + e.what());
  }
  r.integer("practice_trials_per_block", plan.practice_trials_per_block);
  r.boolean("counterbalance", plan.counterbalance);
  r.boolean("common_random_numbers", plan.common_random_numbers);
  r.integer("threads", plan.threads);
  if (r.take("agent")) detail::read_agent(r.at("agent"), r.child("agent"), plan.agent);
  r.finish();

  try {
    plan.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return plan;
}

inline ExperimentPlan plan_from_json_text(std::string_view text,
                                          std::optional<Preset> preset_override = std::nullopt) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return plan_from_json(doc, preset_override);
}

inline ExperimentPlan load_plan(const std::string& path,
                                std::optional<Preset> preset_override = std::nullopt) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return plan_from_json_text(ss.str(), preset_override);
}

}  // namespace curvecast
