#include "sns/controller.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "sns/bptt.hpp"
#include "sns/error.hpp"

namespace sns {

namespace {

constexpr double kRange = 20.0;  // mV span of every encoded quantity
constexpr const char* kAxes = "xyz";

}  // namespace

void ControllerConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw InvalidParameter("controller config: " + msg);
  };
  if (!(th1 > 0.0 && th1 < th2)) fail("need 0 < th1 < th2");
  if (!(thF > 0.0 && thF < kRange)) fail("thF must lie inside (0, 20) mV");
  if (!(lift_dz >= 0.0)) fail("lift_dz must be >= 0");
  if (!(open_angle > closed_angle)) fail("open_angle must exceed closed_angle");
  if (closed_angle < 0.0 || open_angle > 90.0) fail("angles must lie in [0, 90] deg");
  if (!((gain.array() > 0.0).all())) fail("workspace gains must be > 0");
  if (gain.x() != gain.y() || gain.y() != gain.z()) {
    fail("distance detectors need the same gain on every axis");
  }
  if (!offset.allFinite()) fail("workspace offset must be finite");
  if (!(dt_ctrl > 0.0)) fail("dt_ctrl must be > 0");
  if (!(detector_gain > 0.0 && command_gain > 0.0 && shunt > 0.0)) {
    fail("gains must be > 0");
  }
}

Vec3 ControllerConfig::upper() const {
  return offset + (kRange / gain.array()).matrix();
}

namespace {

Vec3 vec3_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw InvalidParameter("controller config: expected a 3-vector");
  return {v[0], v[1], v[2]};
}

nlohmann::json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

ControllerConfig controller_config_from_json(const std::string& text) {
  ControllerConfig c;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_object()) throw InvalidParameter("controller config: expected an object");
    c.th1 = doc.value("th1", c.th1);
    c.th2 = doc.value("th2", c.th2);
    c.thF = doc.value("thF", c.thF);
    c.lift_dz = doc.value("lift_dz", c.lift_dz);
    c.open_angle = doc.value("open_angle", c.open_angle);
    c.closed_angle = doc.value("closed_angle", c.closed_angle);
    if (doc.contains("workspace_offset")) c.offset = vec3_from(doc["workspace_offset"]);
    if (doc.contains("workspace_gain")) c.gain = vec3_from(doc["workspace_gain"]);
    c.dt_ctrl = doc.value("dt_ctrl", c.dt_ctrl);
    c.detector_gain = doc.value("detector_gain", c.detector_gain);
    c.command_gain = doc.value("command_gain", c.command_gain);
    c.shunt = doc.value("shunt", c.shunt);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("controller config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string controller_config_to_json(const ControllerConfig& c) {
  nlohmann::json doc;
  doc["th1"] = c.th1;
  doc["th2"] = c.th2;
  doc["thF"] = c.thF;
  doc["lift_dz"] = c.lift_dz;
  doc["open_angle"] = c.open_angle;
  doc["closed_angle"] = c.closed_angle;
  doc["workspace_offset"] = vec3_json(c.offset);
  doc["workspace_gain"] = vec3_json(c.gain);
  doc["dt_ctrl"] = c.dt_ctrl;
  doc["detector_gain"] = c.detector_gain;
  doc["command_gain"] = c.command_gain;
  doc["shunt"] = c.shunt;
  return doc.dump(2);
}

std::string_view to_string(SubtaskId id) {
  switch (id) {
    case SubtaskId::MoveAboveObject:
      return "MoveAboveObject";
    case SubtaskId::DescendToObject:
      return "DescendToObject";
    case SubtaskId::GraspObject:
      return "GraspObject";
    case SubtaskId::LiftObject:
      return "LiftObject";
    case SubtaskId::MoveToTarget:
      return "MoveToTarget";
    case SubtaskId::LowerToTarget:
      return "LowerToTarget";
    case SubtaskId::ReleaseObject:
      return "ReleaseObject";
    case SubtaskId::Retract:
      return "Retract";
    case SubtaskId::ReturnedHome:
      return "ReturnedHome";
  }
  return "?";
}

SubnetWeights SubnetWeights::from_subnets(const NetworkParams& sub, int sub_output,
                                          const NetworkParams& add, int add_output) {
  if (sub.clamped.size() != 2 || add.clamped.size() != 2) {
    throw InvalidParameter("subnet weights: expected two-input subnetworks");
  }
  SubnetWeights w;
  w.sub_w_plus = sub.W(sub_output, sub.clamped[0]);
  w.sub_w_minus = sub.W(sub_output, sub.clamped[1]);
  w.sub_b = sub.b[sub_output];
  w.sub_tau = sub.tau[sub_output];
  w.add_w = 0.5 * (add.W(add_output, add.clamped[0]) + add.W(add_output, add.clamped[1]));
  w.add_b = add.b[add_output];
  w.add_tau = add.tau[add_output];
  return w;
}

int Controller::at(const std::string& name) const {
  const auto it = index.find(name);
  if (it == index.end()) throw InvalidParameter("controller: no neuron named '" + name + "'");
  return it->second;
}

namespace {

struct Builder {
  struct Neuron {
    std::string name;
    double bias = 0.0;
    double tau = 0.0;
  };
  struct Synapse {
    int post, pre;
    double w, v;
  };
  std::vector<Neuron> neurons;
  std::vector<Synapse> synapses;

  int add(std::string name, double bias = 0.0, double tau = 0.0) {
    neurons.push_back({std::move(name), bias, tau});
    return static_cast<int>(neurons.size()) - 1;
  }
  void connect(int post, int pre, double w, double v = 0.0) {
    synapses.push_back({post, pre, w, v});
  }
};

}  // namespace

Controller build_controller(const ControllerConfig& config, const SubnetWeights& sw) {
  config.validate();
  Builder nb;
  const double g_det = config.detector_gain;
  const double g_cmd = config.command_gain;
  const double mv_per_m = config.gain.x();

  // Sensors, in clamp order.
  std::array<int, 3> grip{}, obj_in{}, tar_in{};
  for (int a = 0; a < 3; ++a) grip[a] = nb.add(std::string("grip_") + kAxes[a]);
  for (int a = 0; a < 3; ++a) obj_in[a] = nb.add(std::string("obj_") + kAxes[a]);
  for (int a = 0; a < 3; ++a) tar_in[a] = nb.add(std::string("tar_") + kAxes[a]);
  const int force_in = nb.add("force");

  // Rectified differences ref - gripper (pos) and gripper - ref (neg).
  auto differences = [&](const std::array<int, 3>& ref, const std::string& tag) {
    std::vector<int> out;
    for (int a = 0; a < 3; ++a) {
      const std::string axis(1, kAxes[a]);
      const int pos = nb.add("d" + tag + axis + "_pos", sw.sub_b, sw.sub_tau);
      nb.connect(pos, ref[a], sw.sub_w_plus);
      nb.connect(pos, grip[a], sw.sub_w_minus);
      const int neg = nb.add("d" + tag + axis + "_neg", sw.sub_b, sw.sub_tau);
      nb.connect(neg, grip[a], sw.sub_w_plus);
      nb.connect(neg, ref[a], sw.sub_w_minus);
      out.push_back(pos);
      out.push_back(neg);
    }
    return out;
  };
  const std::vector<int> diff_o = differences(obj_in, "O");
  const std::vector<int> diff_t = differences(tar_in, "T");

  const int dist_o = nb.add("dist_O", sw.add_b, sw.add_tau);
  for (int d : diff_o) nb.connect(dist_o, d, sw.add_w);
  const int dist_t = nb.add("dist_T", sw.add_b, sw.add_tau);
  for (int d : diff_t) nb.connect(dist_t, d, sw.add_w);

  // Detector potential = g (input_mV - threshold_mV).
  auto detector = [&](const std::string& name, int pre, double threshold_mv) {
    const int id = nb.add(name, -g_det * threshold_mv);
    nb.connect(id, pre, g_det * kRange);
    return id;
  };
  const int away_o = detector("away_O", dist_o, config.th1 * mv_per_m);
  const int far_o = detector("far_O", dist_o, config.th2 * mv_per_m);
  const int away_t = detector("away_T", dist_t, config.th1 * mv_per_m);
  const int far_t = detector("far_T", dist_t, config.th2 * mv_per_m);
  const int touch = detector("touch", force_in, config.thF);

  // Command neuron potential = 20 + g (sum(exc) - |exc|) - g sum(inh).
  auto command = [&](const std::string& name, std::initializer_list<int> exc,
                     std::initializer_list<int> inh) {
    const int id = nb.add(name, kRange - g_cmd * static_cast<double>(exc.size()));
    for (int e : exc) nb.connect(id, e, g_cmd);
    for (int i : inh) nb.connect(id, i, -g_cmd);
    return id;
  };
  Controller ctrl;
  ctrl.commands = {
      command("S1_MoveAboveObject", {far_o, away_t}, {touch}),
      command("S2_DescendToObject", {away_o}, {touch, far_o}),
      command("S3_GraspObject", {}, {touch, away_o}),
      command("S4_LiftObject", {touch}, {away_o}),
      command("S5_MoveToTarget", {touch, away_o, far_t}, {}),
      command("S6_LowerToTarget", {touch, away_o, away_t}, {far_t}),
      command("S7_ReleaseObject", {touch, away_o}, {away_t}),
      command("S8_Retract", {}, {touch, away_t}),
  };
  const auto& S = ctrl.commands;

  auto primitive = [&](const std::string& name, std::initializer_list<int> from) {
    const int id = nb.add(name);
    for (int s : from) nb.connect(id, S[static_cast<std::size_t>(s - 1)], g_cmd);
    return id;
  };
  ctrl.obj = primitive("Obj", {1, 2, 3, 4});
  ctrl.tar = primitive("Tar", {5, 6, 7, 8});
  ctrl.dz = primitive("dz", {1, 4, 5, 8});
  ctrl.open = primitive("open", {1, 2, 7, 8});

  // Relays pass a position through unless the other primitive shunts them.
  std::array<int, 3> relay_o{}, relay_t{};
  for (int a = 0; a < 3; ++a) {
    const std::string axis(1, kAxes[a]);
    relay_o[a] = nb.add("relay_O" + axis);
    nb.connect(relay_o[a], obj_in[a], kRange);
    nb.connect(relay_o[a], ctrl.tar, 0.0, config.shunt);
    relay_t[a] = nb.add("relay_T" + axis);
    nb.connect(relay_t[a], tar_in[a], kRange);
    nb.connect(relay_t[a], ctrl.obj, 0.0, config.shunt);
  }
  for (int a = 0; a < 3; ++a) {
    const int m = nb.add(std::string(1, kAxes[a]) + "_cmd");
    nb.connect(m, relay_o[a], kRange);
    nb.connect(m, relay_t[a], kRange);
    if (a == 2) nb.connect(m, ctrl.dz, config.lift_dz * config.gain.z());
    ctrl.motor_xyz[a] = m;
  }
  const double closed_mv = encode_angle(config.closed_angle);
  const double open_mv = encode_angle(config.open_angle);
  ctrl.lc = nb.add("lc_cmd", closed_mv);
  nb.connect(ctrl.lc, ctrl.open, open_mv - closed_mv);
  ctrl.rc = nb.add("rc_cmd", closed_mv);
  nb.connect(ctrl.rc, ctrl.open, open_mv - closed_mv);

  const int n = static_cast<int>(nb.neurons.size());
  NetworkParams p = NetworkParams::zeros(n, config.dt_ctrl, 0.0, kRange);
  for (int i = 0; i < n; ++i) {
    p.b[i] = nb.neurons[static_cast<std::size_t>(i)].bias;
    p.tau[i] = nb.neurons[static_cast<std::size_t>(i)].tau;
  }
  for (const auto& s : nb.synapses) {
    p.mask(s.post, s.pre) = true;
    p.W(s.post, s.pre) += s.w;
    p.V(s.post, s.pre) += s.v;
  }
  for (int a = 0; a < 3; ++a) p.clamped.push_back(grip[a]);
  for (int a = 0; a < 3; ++a) p.clamped.push_back(obj_in[a]);
  for (int a = 0; a < 3; ++a) p.clamped.push_back(tar_in[a]);
  p.clamped.push_back(force_in);
  p.validate();

  ctrl.config = config;
  ctrl.params = std::move(p);
  for (int i = 0; i < n; ++i) {
    ctrl.names.push_back(nb.neurons[static_cast<std::size_t>(i)].name);
    ctrl.index[ctrl.names.back()] = i;
  }
  return ctrl;
}

double encode_axis(double metres, int axis, const ControllerConfig& config) {
  return (metres - config.offset[axis]) * config.gain[axis];
}

double decode_axis(double mv, int axis, const ControllerConfig& config) {
  return mv / config.gain[axis] + config.offset[axis];
}

double encode_angle(double degrees) { return degrees / 90.0 * kRange; }
double decode_angle(double mv) { return mv / kRange * 90.0; }

std::vector<double> encode_sensors(const SensorFrame& frame, const ControllerConfig& config) {
  std::vector<double> out;
  out.reserve(10);
  const Vec3 lo = config.lower();
  const Vec3 hi = config.upper();
  auto put = [&](const Vec3& p, const char* what) {
    for (int a = 0; a < 3; ++a) {
      // A little slack so values decoded from the network round-trip.
      constexpr double slack = 1e-9;
      if (!std::isfinite(p[a]) || p[a] < lo[a] - slack || p[a] > hi[a] + slack) {
        throw EncodeError(std::string("encode_sensors: ") + what + " " + kAxes[a] + "=" +
                          std::to_string(p[a]) + " m is outside the workspace");
      }
      out.push_back(std::clamp(encode_axis(p[a], a, config), 0.0, kRange));
    }
  };
  put(frame.gripper, "gripper");
  put(frame.object, "object");
  put(frame.target, "target");
  out.push_back(frame.force ? kRange : 0.0);
  return out;
}

NeuronState settle_controller(const Controller& ctrl, const SensorFrame& frame) {
  const std::vector<double> in = encode_sensors(frame, ctrl.config);
  return steady_state(ctrl.params, in, 1e-9, 10000).state;
}

ControllerOutput read_controller(const Controller& ctrl, const NeuronState& state) {
  const NetworkParams& p = ctrl.params;
  ControllerOutput out;
  for (int a = 0; a < 3; ++a) {
    const double mv = readout(state.h[ctrl.motor_xyz[a]], p.e_lo, p.e_hi);
    out.command.xyz[a] = decode_axis(mv, a, ctrl.config);
  }
  const double lc = readout(state.h[ctrl.lc], p.e_lo, p.e_hi);
  const double rc = readout(state.h[ctrl.rc], p.e_lo, p.e_hi);
  out.command.angle = decode_angle(0.5 * (lc + rc));
  for (int k = 0; k < kSubtaskCount; ++k) {
    out.activities[static_cast<std::size_t>(k)] =
        activation(state.h[ctrl.commands[static_cast<std::size_t>(k)]], p.e_lo, p.e_hi);
  }
  return out;
}

ControllerOutput controller_step(const Controller& ctrl, NeuronState& state,
                                 const SensorFrame& frame) {
  const std::vector<double> in = encode_sensors(frame, ctrl.config);
  state = step(ctrl.params, state, in);
  return read_controller(ctrl, state);
}

std::optional<SubtaskId> dominant_subtask(std::span<const double> activities) {
  if (activities.size() != static_cast<std::size_t>(kSubtaskCount)) {
    throw InvalidParameter("dominant_subtask: expected 8 activities");
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < activities.size(); ++k) {
    if (activities[k] > activities[best]) best = k;
  }
  if (!(activities[best] > 0.5)) return std::nullopt;
  return static_cast<SubtaskId>(static_cast<int>(best) + 1);
}

std::string controller_to_json(const Controller& ctrl) {
  nlohmann::json doc = detail::params_json(ctrl.params);
  doc["names"] = ctrl.names;
  doc["controller_config"] = nlohmann::json::parse(controller_config_to_json(ctrl.config));
  return doc.dump(2);
}

}  // namespace sns
