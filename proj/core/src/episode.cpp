#include "sns/episode.hpp"

#include <optional>

#include "json_util.hpp"
#include "sns/error.hpp"
#include "sns/protocol.hpp"

namespace sns {

void PickPlaceConfig::validate() const {
  controller.validate();
  sim.validate();
  if (max_steps < 1) throw InvalidParameter("pickplace config: max_steps must be >= 1");
  if (!(tolerance > 0.0)) throw InvalidParameter("pickplace config: tolerance must be > 0");
  if (controller.dt_ctrl != sim.dt) {
    throw InvalidParameter("pickplace config: controller dt_ctrl must equal sim dt");
  }
}

namespace {

PickPlaceConfig pickplace_from(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InvalidParameter("pickplace config: expected an object");
  PickPlaceConfig c;
  try {
    if (doc.contains("controller")) {
      c.controller = controller_config_from_json(doc["controller"].dump());
    }
    if (doc.contains("sim")) c.sim = sim_config_from_json(doc["sim"].dump());
    if (doc.contains("episode")) {
      const auto& e = doc["episode"];
      c.max_steps = e.value("max_steps", c.max_steps);
      c.tolerance = e.value("tolerance", c.tolerance);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("pickplace config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace

PickPlaceConfig pickplace_config_from_json(const std::string& text) {
  try {
    return pickplace_from(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidParameter(std::string("pickplace config: ") + e.what());
  }
}

PickPlaceConfig load_pickplace_config(const std::filesystem::path& path) {
  return pickplace_from(detail::read_json_file(path));
}

std::string pickplace_config_to_json(const PickPlaceConfig& c) {
  nlohmann::json doc;
  doc["controller"] = nlohmann::json::parse(controller_config_to_json(c.controller));
  doc["sim"] = nlohmann::json::parse(sim_config_to_json(c.sim));
  doc["episode"] = {{"max_steps", c.max_steps}, {"tolerance", c.tolerance}};
  return doc.dump(2);
}

std::vector<int> collapse_labels(const std::vector<TraceStep>& steps) {
  std::vector<int> out;
  for (const TraceStep& s : steps) {
    if (s.subtask == kNoSubtask) continue;
    if (out.empty() || out.back() != s.subtask) out.push_back(s.subtask);
  }
  return out;
}

namespace {

struct Observation {
  Vec3 position;
  bool force;
};

class DirectPlant {
 public:
  explicit DirectPlant(const SimConfig& sim) : sim_(sim), state_(GantryState::initial(sim)) {}
  Observation observe() const { return {state_.position, state_.force}; }
  void act(const MotorCommand& cmd) { state_ = sim_step(state_, cmd, sim_); }
  const GantryState& state() const { return state_; }

 private:
  SimConfig sim_;
  GantryState state_;
};

class ProtocolPlant {
 public:
  ProtocolPlant(const SimConfig& sim, double latency) : device_(sim, latency) {}

  Observation observe() {
    const auto lines = device_.transact(encode_query());
    std::optional<Vec3> pos;
    std::optional<bool> contact;
    bool ack = false;
    for (const std::string& raw : lines) {
      const DeviceLine line = parse_report(raw);
      if (line.kind == LineKind::PositionReport) pos = line.xyz;
      if (line.kind == LineKind::ContactReport) contact = line.contact;
      if (line.kind == LineKind::Ack) ack = true;
    }
    if (!pos || !contact || !ack) throw Error("protocol: incomplete answer to M114");
    return {*pos, *contact};
  }

  void act(const MotorCommand& cmd) {
    send(encode_move(cmd.xyz));
    send(encode_grasper(cmd.angle));
    device_.step_once();
  }

  const GantryState& state() const { return device_.state(); }

 private:
  void send(const std::string& line) {
    const auto reply = device_.transact(line);
    if (reply.size() != 1 || parse_report(reply[0]).kind != LineKind::Ack) {
      throw Error("protocol: device rejected '" + line + "': " +
                  (reply.empty() ? std::string("no reply") : reply[0]));
    }
  }

  LoopbackDevice device_;
};

template <class Plant>
EpisodeTrace run_loop(const Controller& ctrl, const SimConfig& sim, Plant& plant,
                      int max_steps, double tolerance, const EpisodeOptions& options) {
  if (max_steps < 1) throw InvalidParameter("run_episode: max_steps must be >= 1");
  if (!(tolerance > 0.0)) throw InvalidParameter("run_episode: tolerance must be > 0");
  sim.validate();

  EpisodeTrace trace;
  Vec3 object_input = sim.object_start;
  bool home_phase = false;
  std::optional<SubtaskId> last_dominant;

  auto frame_for = [&](const Observation& obs) {
    SensorFrame f;
    f.gripper = obs.position;
    f.object = object_input;
    f.target = sim.target;
    f.force = obs.force && !options.force_fault;
    return f;
  };

  NeuronState net = settle_controller(ctrl, frame_for(plant.observe()));
  for (int k = 0; k < max_steps; ++k) {
    TraceStep rec;
    try {
      rec.sensors = frame_for(plant.observe());
      const ControllerOutput out = controller_step(ctrl, net, rec.sensors);
      rec.activities = out.activities;
      rec.command = out.command;
      const auto dominant = dominant_subtask(out.activities);
      if (!home_phase && last_dominant == SubtaskId::Retract && dominant &&
          *dominant != SubtaskId::Retract) {
        home_phase = true;
        object_input = sim.gripper_start;
      }
      if (dominant) last_dominant = dominant;
      rec.subtask = home_phase ? kHomeLabel : (dominant ? static_cast<int>(*dominant) : kNoSubtask);
      plant.act(out.command);
    } catch (const NumericalFault& e) {
      throw NumericalFault(std::string(e.what()) + " (episode step " + std::to_string(k) + ")",
                           e.neuron(), k);
    } catch (const EncodeError& e) {
      throw EncodeError(std::string(e.what()) + " (episode step " + std::to_string(k) + ")");
    }
    rec.state = plant.state();
    rec.t = rec.state.t;
    trace.steps.push_back(rec);

    const GantryState& st = rec.state;
    const bool done = home_phase && !st.attached && st.velocity.isZero(0.0) &&
                      (st.object - sim.target).norm() <= tolerance &&
                      (st.position - sim.gripper_start).norm() <= tolerance;
    if (done) {
      trace.summary.success = true;
      break;
    }
  }

  EpisodeSummary& s = trace.summary;
  const GantryState& last = trace.steps.back().state;
  s.object_error = (last.object - sim.target).norm();
  s.gripper_error = (last.position - sim.gripper_start).norm();
  s.duration = last.t;
  s.steps = static_cast<int>(trace.steps.size());
  s.returned_home = home_phase;
  s.sequence = collapse_labels(trace.steps);
  return trace;
}

}  // namespace

EpisodeTrace run_episode(const Controller& ctrl, const SimConfig& sim, int max_steps,
                         double tolerance, const EpisodeOptions& options) {
  DirectPlant plant(sim);
  return run_loop(ctrl, sim, plant, max_steps, tolerance, options);
}

EpisodeTrace run_episode_via_protocol(const Controller& ctrl, const SimConfig& sim,
                                      int max_steps, double tolerance, double latency_s,
                                      const EpisodeOptions& options) {
  ProtocolPlant plant(sim, latency_s);
  return run_loop(ctrl, sim, plant, max_steps, tolerance, options);
}

}  // namespace sns
