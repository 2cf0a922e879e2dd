#include "sns/gantry.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "sns/error.hpp"

namespace sns {

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) { throw InvalidParameter("sim config: " + msg); };
  if (!((workspace_lo.array() < workspace_hi.array()).all())) fail("empty workspace");
  if (!((v_max.array() > 0.0).all()) || !(v_max_z_down > 0.0)) fail("v_max must be > 0");
  if (!((a_max.array() > 0.0).all())) fail("a_max must be > 0");
  if (!(grasp_rate > 0.0)) fail("grasp_rate must be > 0");
  if (!(capture_radius > 0.0)) fail("capture_radius must be > 0");
  if (!(grasp_angle > 0.0 && grasp_angle < release_angle)) {
    fail("need 0 < grasp_angle < release_angle");
  }
  if (!((object_size.array() > 0.0).all()) || !(object_mass > 0.0)) {
    fail("object size and mass must be > 0");
  }
  if (!(dt > 0.0)) fail("dt must be > 0");
  auto inside = [&](const Vec3& p) {
    return (p.array() >= workspace_lo.array()).all() &&
           (p.array() <= workspace_hi.array()).all();
  };
  if (!inside(gripper_start) || !inside(object_start) || !inside(target)) {
    fail("start, object and target must lie inside the workspace");
  }
}

double SimConfig::speed_limit(int axis, double sign) const {
  if (axis == 2 && sign < 0.0) return v_max_z_down;
  return v_max[axis];
}

namespace {

Vec3 vec3_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw InvalidParameter("sim config: expected a 3-vector");
  return {v[0], v[1], v[2]};
}

nlohmann::json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

SimConfig sim_config_from_json(const std::string& text) {
  SimConfig c;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_object()) throw InvalidParameter("sim config: expected an object");
    auto vec = [&](const char* key, Vec3& out) {
      if (doc.contains(key)) out = vec3_from(doc[key]);
    };
    vec("workspace_lo", c.workspace_lo);
    vec("workspace_hi", c.workspace_hi);
    vec("v_max", c.v_max);
    c.v_max_z_down = doc.value("v_max_z_down", c.v_max_z_down);
    vec("a_max", c.a_max);
    c.grasp_rate = doc.value("grasp_rate", c.grasp_rate);
    c.capture_radius = doc.value("capture_radius", c.capture_radius);
    c.grasp_angle = doc.value("grasp_angle", c.grasp_angle);
    c.release_angle = doc.value("release_angle", c.release_angle);
    vec("object_size", c.object_size);
    c.object_mass = doc.value("object_mass", c.object_mass);
    c.dt = doc.value("dt", c.dt);
    vec("gripper_start", c.gripper_start);
    c.angle_start = doc.value("angle_start", c.angle_start);
    vec("object_start", c.object_start);
    vec("target", c.target);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("sim config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string sim_config_to_json(const SimConfig& c) {
  nlohmann::json doc;
  doc["workspace_lo"] = vec3_json(c.workspace_lo);
  doc["workspace_hi"] = vec3_json(c.workspace_hi);
  doc["v_max"] = vec3_json(c.v_max);
  doc["v_max_z_down"] = c.v_max_z_down;
  doc["a_max"] = vec3_json(c.a_max);
  doc["grasp_rate"] = c.grasp_rate;
  doc["capture_radius"] = c.capture_radius;
  doc["grasp_angle"] = c.grasp_angle;
  doc["release_angle"] = c.release_angle;
  doc["object_size"] = vec3_json(c.object_size);
  doc["object_mass"] = c.object_mass;
  doc["dt"] = c.dt;
  doc["gripper_start"] = vec3_json(c.gripper_start);
  doc["angle_start"] = c.angle_start;
  doc["object_start"] = vec3_json(c.object_start);
  doc["target"] = vec3_json(c.target);
  return doc.dump(2);
}

GantryState GantryState::initial(const SimConfig& config) {
  config.validate();
  GantryState s;
  s.position = config.gripper_start;
  s.angle = config.angle_start;
  s.object = config.object_start;
  return contact_and_grasp(s, config);
}

std::pair<double, double> trapezoid_step(double p, double v, double target,
                                         double v_up, double v_down, double a,
                                         double dt) {
  const double d = target - p;
  const double speed = std::abs(v);
  if (d == 0.0 && v == 0.0) return {p, 0.0};
  const double dir = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : -std::copysign(1.0, v));

  if (v * dir < 0.0 || d == 0.0) {
    // Moving away from the target: brake first.
    const double s = std::max(0.0, speed - a * dt);
    const double v_new = std::copysign(s, v);
    return {p + 0.5 * (v + v_new) * dt, v_new};
  }

  const double limit = dir > 0.0 ? v_up : v_down;
  const double rem = std::abs(d);
  if (speed <= a * dt && rem <= std::min(a * dt * dt, limit * dt)) {
    return {target, 0.0};
  }
  // Largest next speed from which the axis can still stop on the target:
  // (speed + s) dt / 2 + s^2 / (2a) <= rem.
  const double slack = std::max(0.0, rem - 0.5 * speed * dt);
  const double brake =
      0.5 * (-a * dt + std::sqrt(a * a * dt * dt + 8.0 * a * slack));
  double s = std::min({limit, speed + a * dt, brake});
  s = std::min(limit, std::max({s, speed - a * dt, 0.0}));
  const double travel = 0.5 * (speed + s) * dt;
  if (travel >= rem) return {target, 0.0};
  return {p + dir * travel, dir * s};
}

GantryState contact_and_grasp(GantryState s, const SimConfig& config) {
  const bool near = (s.position - s.object).norm() <= config.capture_radius;
  const bool closed = s.angle <= config.grasp_angle;
  if (!s.attached && near && closed) {
    s.attached = true;
    s.grip_offset = s.object - s.position;
  } else if (s.attached && s.angle > config.release_angle) {
    s.attached = false;
  }
  s.force = s.attached || (near && closed);
  return s;
}

GantryState sim_step(const GantryState& state, const MotorCommand& command,
                     const SimConfig& config) {
  if (!command.xyz.allFinite() || !std::isfinite(command.angle)) {
    throw NumericalFault("sim_step: non-finite motor command", -1);
  }
  GantryState s = state;
  const Vec3 goal = command.xyz.cwiseMax(config.workspace_lo).cwiseMin(config.workspace_hi);
  s.command_clamped = goal != command.xyz;
  for (int a = 0; a < 3; ++a) {
    const auto [p, v] =
        trapezoid_step(state.position[a], state.velocity[a], goal[a],
                       config.speed_limit(a, 1.0), config.speed_limit(a, -1.0),
                       config.a_max[a], config.dt);
    s.position[a] = p;
    s.velocity[a] = v;
  }
  const double max_turn = config.grasp_rate * config.dt;
  const double turn = std::clamp(command.angle - state.angle, -max_turn, max_turn);
  s.angle = state.angle + turn;
  s.angle_rate = turn / config.dt;
  if (s.attached) s.object = s.position + s.grip_offset;
  s.t = state.t + config.dt;
  return contact_and_grasp(s, config);
}

}  // namespace sns
