#pragma once

// JSON run configuration. Every field has a default, so an empty object is a
// complete configuration. Angle fields take radians under their plain name
// or degrees under the same name with a `_deg` suffix. Unknown keys are
// rejected.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "limbdyn/ankle_model.hpp"
#include "limbdyn/anthropometry.hpp"
#include "limbdyn/axis_optimizer.hpp"
#include "limbdyn/control.hpp"
#include "limbdyn/csv.hpp"
#include "limbdyn/differential_evolution.hpp"
#include "limbdyn/dynamics.hpp"
#include "limbdyn/errors.hpp"
#include "limbdyn/reference_data.hpp"
#include "limbdyn/units.hpp"

namespace limbdyn {

using Json = nlohmann::ordered_json;

/// Link data in tabulated units (kg, cm, kg·cm²). Kept as given so the
/// config echo reloads to the identical model.
struct LinkSpec {
  std::string name;
  double mass = 0.0;
  std::array<double, 3> com_cm{};
  std::array<double, 6> inertia_kgcm2{};  // xx, yy, zz, xy, xz, yz

  RigidLink link() const { return link_from_table(name, mass, com_cm, inertia_kgcm2); }
};

struct ModelConfig {
  std::array<LinkSpec, 4> links;
  double shank_length = 0.418;
  double gravity = 9.81;
  VelocityMode velocity_mode = VelocityMode::exact;
  PassiveJointSet passive;

  ModelConfig() {
    for (std::size_t b = 0; b < 4; ++b) {
      const auto& row = kReferenceLinkTable[b];
      links[b] = {row.name, row.mass_kg, row.com_cm, row.inertia_kgcm2};
    }
  }

  SystemModel model() const {
    SystemModel m;
    for (std::size_t b = 0; b < 4; ++b) m.links[b] = links[b].link();
    m.shank_length = shank_length;
    m.gravity = gravity;
    m.velocity_mode = velocity_mode;
    m.passive = passive;
    return m;
  }
};

struct AnkleConfig {
  AnkleParameters params;
  HingeCoupling coupling;
  double gamma_lo = deg_to_rad(-20.0);
  double gamma_hi = deg_to_rad(20.0);
};

struct OptimizerConfig {
  DEConfig de;
  double offset_limit = 0.10;             // m
  double angle_limit = deg_to_rad(60.0);  // rad
};

struct InverseDynamicsConfig {
  double period = 15.0;
  double dt = 0.01;
};

struct ControlConfig {
  std::string gains_preset = "simulation";
  std::optional<AxisGains> gains;  // explicit gains override the preset
  AxisMotors motors = reference_motors();
  ActuatorModel actuator = ActuatorModel::dc_motor;
  bool enforce_motor_limits = true;
  double dt = 1e-3;
  double duration = 30.0;
  double rms_start = 15.0;
  SubjectProfile reference_subject;
  std::vector<SubjectProfile> subjects = {{1.5, 45.0}, {1.7, 65.0}, {1.9, 85.0}};

  AxisGains resolved_gains() const {
    if (gains) return *gains;
    if (gains_preset == "simulation") return simulation_gains();
    if (gains_preset == "experiment") return experiment_gains();
    throw ConfigError("control.gains_preset: unknown preset '" + gains_preset + "'");
  }

  SimOptions sim_options() const { return {actuator, dt, duration, rms_start, enforce_motor_limits}; }
};

struct ToolConfig {
  ModelConfig model;
  AnkleConfig ankle;
  OptimizerConfig optimizer;
  InverseDynamicsConfig inverse_dynamics;
  ReferenceTrajectory trajectory;
  ControlConfig control;
  std::string output_dir;

  void validate() const;
};

namespace detail {

/// Reads one JSON object, tracking which keys were used.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "must be an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(key_path(key) + ": wrong type");
    }
  }

  /// Angle stored in radians; accepts `key` (rad) or `key_deg` (degrees).
  void read_angle(const std::string& key, double& out) {
    const std::string deg = key + "_deg";
    if (j_.contains(key) && j_.contains(deg)) {
      throw ConfigError(key_path(key) + ": give either '" + key + "' or '" + deg + "', not both");
    }
    if (j_.contains(deg)) {
      double v = 0.0;
      read(deg, v);
      out = deg_to_rad(v);
    } else {
      read(key, out);
    }
  }

  /// Non-negative integer.
  template <typename T>
  void read_count(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(key_path(key) + ": expected a non-negative integer");
    }
    read(key, out);
  }

  template <std::size_t N>
  void read_array(const std::string& key, std::array<double, N>& out) {
    if (!j_.contains(key)) return;
    std::vector<double> v;
    read(key, v);
    if (v.size() != N) throw ConfigError(key_path(key) + ": expected " + std::to_string(N) + " numbers");
    std::copy(v.begin(), v.end(), out.begin());
  }

  std::optional<Section> child(const std::string& key) {
    if (!j_.contains(key)) return std::nullopt;
    used_.insert(key);
    return Section(j_.at(key), key_path(key));
  }

  const Json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(key_path(it.key()) + ": unknown key");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config: " : path_ + ": "; }

  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <typename F>
void with_child(Section& s, const std::string& key, F&& f) {
  if (auto c = s.child(key)) {
    f(*c);
    c->finish();
  }
}

inline void require(bool ok, const std::string& key, const std::string& rule) {
  if (!ok) throw ConfigError(key + ": " + rule);
}

inline VelocityMode parse_velocity_mode(const std::string& s, const std::string& key) {
  if (s == "exact") return VelocityMode::exact;
  if (s == "knee_lever") return VelocityMode::knee_lever;
  throw ConfigError(key + ": expected 'exact' or 'knee_lever'");
}

inline std::string to_string(VelocityMode m) { return m == VelocityMode::exact ? "exact" : "knee_lever"; }

inline ActuatorModel parse_actuator(const std::string& s, const std::string& key) {
  if (s == "dc_motor") return ActuatorModel::dc_motor;
  if (s == "torque_source") return ActuatorModel::torque_source;
  throw ConfigError(key + ": expected 'dc_motor' or 'torque_source'");
}

inline std::string to_string(ActuatorModel m) { return m == ActuatorModel::dc_motor ? "dc_motor" : "torque_source"; }

inline TrajectoryKind parse_kind(const std::string& s, const std::string& key) {
  if (s == "isokinetic") return TrajectoryKind::isokinetic;
  if (s == "sinusoid") return TrajectoryKind::sinusoid;
  throw ConfigError(key + ": expected 'isokinetic' or 'sinusoid'");
}

inline std::string to_string(TrajectoryKind k) { return k == TrajectoryKind::isokinetic ? "isokinetic" : "sinusoid"; }

inline constexpr std::array<const char*, 3> kAxisKeys = {"theta", "phi", "alpha"};

inline void read_model(Section& s, ModelConfig& m) {
  with_child(s, "links", [&](Section& links) {
    for (auto& l : m.links) {
      with_child(links, l.name, [&](Section& ls) {
        ls.read("mass", l.mass);
        ls.read_array("com_cm", l.com_cm);
        ls.read_array("inertia_kgcm2", l.inertia_kgcm2);
      });
    }
  });
  s.read("shank_length", m.shank_length);
  s.read("gravity", m.gravity);
  if (s.has("velocity_mode")) {
    std::string v;
    s.read("velocity_mode", v);
    m.velocity_mode = parse_velocity_mode(v, s.key_path("velocity_mode"));
  }
  s.read("knee_stiffness", m.passive.knee_stiffness);
  s.read("knee_damping", m.passive.knee_damping);
  s.read_array("k_alpha", m.passive.k_alpha.coeffs);
  s.read_array("k_phi", m.passive.k_phi.coeffs);
  s.read_array("k_psi", m.passive.k_psi.coeffs);
  s.read("springs_enabled", m.passive.springs_enabled);
}

inline void read_ankle(Section& s, AnkleConfig& a) {
  s.read("height", a.params.height);
  s.read_angle("talocrural_incline", a.params.talocrural_incline);
  s.read_angle("subtalar_incline", a.params.subtalar_incline);
  s.read_angle("subtalar_deviation", a.params.subtalar_deviation);
  s.read("foot_length_ratio", a.params.foot_length_ratio);
  s.read("foot_breadth_ratio", a.params.foot_breadth_ratio);
  s.read("ankle_height_ratio", a.params.ankle_height_ratio);
  s.read("heel_position", a.params.heel_position);
  s.read("metatarsal_position", a.params.metatarsal_position);
  s.read("coupling_slope", a.coupling.slope);
  s.read_angle("coupling_offset", a.coupling.offset);
  s.read_angle("gamma_lo", a.gamma_lo);
  s.read_angle("gamma_hi", a.gamma_hi);
}

inline void read_optimizer(Section& s, OptimizerConfig& o) {
  s.read_count("population_size", o.de.population_size);
  s.read("amplification", o.de.amplification);
  s.read("crossover_prob", o.de.crossover_prob);
  s.read("mutation_prob", o.de.mutation_prob);
  s.read_count("max_generations", o.de.max_generations);
  s.read_count("seed", o.de.rng_seed);
  s.read_count("threads", o.de.threads);
  s.read("offset_limit", o.offset_limit);
  s.read_angle("angle_limit", o.angle_limit);
}

inline void read_trajectory(Section& s, ReferenceTrajectory& t) {
  if (s.has("kind")) {
    std::string k;
    s.read("kind", k);
    t.kind = parse_kind(k, s.key_path("kind"));
  }
  s.read("period", t.period);
  s.read("dwell", t.dwell);
  s.read_angle("theta_lo", t.theta_lo);
  s.read_angle("theta_hi", t.theta_hi);
  s.read_angle("phi_lo", t.phi_lo);
  s.read_angle("phi_hi", t.phi_hi);
  with_child(s, "coupling", [&](Section& c) {
    c.read("a", t.coupling.a);
    c.read_angle("b", t.coupling.b);
    c.read("c", t.coupling.c);
  });
}

inline void read_subject(Section& s, SubjectProfile& p) {
  s.read("height", p.height);
  s.read("mass", p.mass);
}

inline void read_control(Section& s, ControlConfig& c) {
  s.read("gains_preset", c.gains_preset);
  with_child(s, "gains", [&](Section& g) {
    AxisGains gains = c.resolved_gains();
    for (std::size_t k = 0; k < 3; ++k) {
      with_child(g, kAxisKeys[k], [&](Section& a) {
        a.read("kp", gains[k].kp);
        a.read("ki", gains[k].ki);
      });
    }
    c.gains = gains;
  });
  with_child(s, "motors", [&](Section& ms) {
    for (std::size_t k = 0; k < 3; ++k) {
      with_child(ms, kAxisKeys[k], [&](Section& m) {
        MotorSpec& spec = c.motors[k];
        m.read("torque_constant", spec.torque_constant);
        m.read("rated_torque", spec.rated_torque);
        m.read("rated_speed", spec.rated_speed);
        if (m.has("rated_speed_rpm")) {
          if (m.has("rated_speed")) throw ConfigError(m.key_path("rated_speed") + ": give rad/s or rpm, not both");
          double rpm = 0.0;
          m.read("rated_speed_rpm", rpm);
          spec.rated_speed = rpm_to_rad_s(rpm);
        }
        m.read("gear_ratio", spec.gear_ratio);
      });
    }
  });
  if (s.has("actuator")) {
    std::string a;
    s.read("actuator", a);
    c.actuator = parse_actuator(a, s.key_path("actuator"));
  }
  s.read("enforce_motor_limits", c.enforce_motor_limits);
  s.read("dt", c.dt);
  s.read("duration", c.duration);
  s.read("rms_start", c.rms_start);
  with_child(s, "reference_subject", [&](Section& r) { read_subject(r, c.reference_subject); });
  if (s.has("subjects")) {
    const Json& arr = s.raw("subjects");
    if (!arr.is_array() || arr.empty()) throw ConfigError(s.key_path("subjects") + ": expected a non-empty array");
    c.subjects.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section sub(arr[i], s.key_path("subjects") + "[" + std::to_string(i) + "]");
      SubjectProfile p;
      read_subject(sub, p);
      sub.finish();
      c.subjects.push_back(p);
    }
  }
}

/// 1-based line and column of a byte offset.
inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

inline void ToolConfig::validate() const {
  using detail::require;
  const SystemModel m = model.model();
  for (std::size_t b = 0; b < 4; ++b) {
    try {
      m.links[b].validate();
    } catch (const ConfigError& e) {
      throw ConfigError("model.links." + model.links[b].name + ": " + e.what());
    }
  }
  require(m.shank_length > 0.0, "model.shank_length", "must be positive");
  require(std::isfinite(m.gravity), "model.gravity", "must be finite");
  require(m.passive.knee_stiffness > 0.0, "model.knee_stiffness", "must be positive");
  require(m.passive.knee_damping > 0.0, "model.knee_damping", "must be positive");
  for (const auto* k : {&m.passive.k_alpha, &m.passive.k_phi, &m.passive.k_psi}) {
    try {
      k->validate();
    } catch (const ConfigError& e) {
      throw ConfigError("model.k_" + k->joint + ": " + e.what());
    }
  }

  require(ankle.params.height > 0.0, "ankle.height", "must be positive");
  require(ankle.params.foot_length_ratio > 0.0, "ankle.foot_length_ratio", "must be positive");
  require(ankle.params.foot_breadth_ratio > 0.0, "ankle.foot_breadth_ratio", "must be positive");
  require(ankle.gamma_hi > ankle.gamma_lo, "ankle.gamma_hi", "must exceed gamma_lo");
  require(std::abs(ankle.gamma_lo) <= kPi / 2 && std::abs(ankle.gamma_hi) <= kPi / 2, "ankle.gamma_lo",
          "sweep must stay within ±90°");
  make_two_hinge_model(ankle.params).validate();

  try {
    optimizer.de.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("optimizer: ") + e.what());
  }
  require(optimizer.offset_limit > 0.0, "optimizer.offset_limit", "must be positive");
  require(optimizer.angle_limit > 0.0 && optimizer.angle_limit <= kPi, "optimizer.angle_limit",
          "must lie in (0, 180°]");

  require(inverse_dynamics.period > 0.0, "inverse_dynamics.period", "must be positive");
  require(inverse_dynamics.dt > 0.0 && inverse_dynamics.dt <= inverse_dynamics.period, "inverse_dynamics.dt",
          "must lie in (0, period]");

  try {
    trajectory.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("trajectory: ") + e.what());
  }

  (void)control.resolved_gains();
  if (control.gains) {
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& g = (*control.gains)[k];
      require(g.kp >= 0.0 && g.ki >= 0.0, std::string("control.gains.") + detail::kAxisKeys[k],
              "kp and ki must be non-negative");
    }
  }
  for (std::size_t k = 0; k < 3; ++k) {
    try {
      control.motors[k].validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("control.motors.") + detail::kAxisKeys[k] + ": " + e.what());
    }
  }
  require(control.dt > 0.0 && control.dt <= 0.01, "control.dt", "must lie in (0, 0.01] s");
  require(control.duration > 0.0, "control.duration", "must be positive");
  require(control.rms_start >= 0.0 && control.rms_start < control.duration, "control.rms_start",
          "must lie in [0, duration)");
  try {
    control.reference_subject.validate();
    for (const auto& s : control.subjects) s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("control.subjects: ") + e.what());
  }
}

inline ToolConfig parse_config(const std::string& text) {
  Json j;
  try {
    if (text.find_first_not_of(" \t\r\n") != std::string::npos) j = Json::parse(text, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError("config parse error at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
  if (j.is_null()) j = Json::object();

  ToolConfig cfg;
  detail::Section root(j, "");
  detail::with_child(root, "model", [&](detail::Section& s) { detail::read_model(s, cfg.model); });
  detail::with_child(root, "ankle", [&](detail::Section& s) { detail::read_ankle(s, cfg.ankle); });
  detail::with_child(root, "optimizer", [&](detail::Section& s) { detail::read_optimizer(s, cfg.optimizer); });
  detail::with_child(root, "inverse_dynamics", [&](detail::Section& s) {
    s.read("period", cfg.inverse_dynamics.period);
    s.read("dt", cfg.inverse_dynamics.dt);
  });
  detail::with_child(root, "trajectory", [&](detail::Section& s) { detail::read_trajectory(s, cfg.trajectory); });
  detail::with_child(root, "control", [&](detail::Section& s) { detail::read_control(s, cfg.control); });
  root.read("output_dir", cfg.output_dir);
  root.finish();
  cfg.validate();
  return cfg;
}

inline ToolConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file '" + path.string() + "' does not exist");
  return parse_config(read_text(path));
}

/// Full configuration in loadable form; angles are written in radians.
inline Json config_to_json(const ToolConfig& c) {
  Json j;
  Json links = Json::object();
  for (const auto& l : c.model.links) {
    links[l.name] = {{"mass", l.mass}, {"com_cm", l.com_cm}, {"inertia_kgcm2", l.inertia_kgcm2}};
  }
  const auto& p = c.model.passive;
  j["model"] = {{"links", links},
                {"shank_length", c.model.shank_length},
                {"gravity", c.model.gravity},
                {"velocity_mode", detail::to_string(c.model.velocity_mode)},
                {"knee_stiffness", p.knee_stiffness},
                {"knee_damping", p.knee_damping},
                {"k_alpha", p.k_alpha.coeffs},
                {"k_phi", p.k_phi.coeffs},
                {"k_psi", p.k_psi.coeffs},
                {"springs_enabled", p.springs_enabled}};
  const auto& a = c.ankle;
  j["ankle"] = {{"height", a.params.height},
                {"talocrural_incline", a.params.talocrural_incline},
                {"subtalar_incline", a.params.subtalar_incline},
                {"subtalar_deviation", a.params.subtalar_deviation},
                {"foot_length_ratio", a.params.foot_length_ratio},
                {"foot_breadth_ratio", a.params.foot_breadth_ratio},
                {"ankle_height_ratio", a.params.ankle_height_ratio},
                {"heel_position", a.params.heel_position},
                {"metatarsal_position", a.params.metatarsal_position},
                {"coupling_slope", a.coupling.slope},
                {"coupling_offset", a.coupling.offset},
                {"gamma_lo", a.gamma_lo},
                {"gamma_hi", a.gamma_hi}};
  const auto& o = c.optimizer;
  j["optimizer"] = {{"population_size", o.de.population_size}, {"amplification", o.de.amplification},
                    {"crossover_prob", o.de.crossover_prob},   {"mutation_prob", o.de.mutation_prob},
                    {"max_generations", o.de.max_generations}, {"seed", o.de.rng_seed},
                    {"threads", o.de.threads},                 {"offset_limit", o.offset_limit},
                    {"angle_limit", o.angle_limit}};
  j["inverse_dynamics"] = {{"period", c.inverse_dynamics.period}, {"dt", c.inverse_dynamics.dt}};
  const auto& t = c.trajectory;
  j["trajectory"] = {{"kind", detail::to_string(t.kind)},
                     {"period", t.period},
                     {"dwell", t.dwell},
                     {"theta_lo", t.theta_lo},
                     {"theta_hi", t.theta_hi},
                     {"phi_lo", t.phi_lo},
                     {"phi_hi", t.phi_hi},
                     {"coupling", {{"a", t.coupling.a}, {"b", t.coupling.b}, {"c", t.coupling.c}}}};
  const auto& k = c.control;
  Json control = {{"gains_preset", k.gains_preset}};
  if (k.gains) {
    Json g = Json::object();
    for (std::size_t i = 0; i < 3; ++i) g[detail::kAxisKeys[i]] = {{"kp", (*k.gains)[i].kp}, {"ki", (*k.gains)[i].ki}};
    control["gains"] = g;
  }
  Json motors = Json::object();
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& m = k.motors[i];
    motors[detail::kAxisKeys[i]] = {{"torque_constant", m.torque_constant},
                                    {"rated_torque", m.rated_torque},
                                    {"rated_speed", m.rated_speed},
                                    {"gear_ratio", m.gear_ratio}};
  }
  control["motors"] = motors;
  control["actuator"] = detail::to_string(k.actuator);
  control["enforce_motor_limits"] = k.enforce_motor_limits;
  control["dt"] = k.dt;
  control["duration"] = k.duration;
  control["rms_start"] = k.rms_start;
  control["reference_subject"] = {{"height", k.reference_subject.height}, {"mass", k.reference_subject.mass}};
  Json subjects = Json::array();
  for (const auto& s : k.subjects) subjects.push_back({{"height", s.height}, {"mass", s.mass}});
  control["subjects"] = subjects;
  j["control"] = control;
  j["output_dir"] = c.output_dir;
  return j;
}

}  // namespace limbdyn
