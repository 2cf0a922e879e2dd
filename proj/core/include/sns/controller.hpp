#pragma once

// Hierarchical pick-and-place controller built as one SNS:
//
//   sensors     gripper/object/target xyz and the force flag (clamped)
//   layer 1     rectified differences object-gripper, target-gripper per axis
//   layer 2     L1 distances and threshold detectors (near/far, force)
//   commands    eight subtask neurons: AND of excitatory inputs, any veto wins
//   primitives  OR interneurons Obj, Tar, dz (lift) and open (gripper)
//   motor       position relays gated by shunting from the opposite primitive,
//               summed into xyz commands; grasper commands from `open`

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sns/network.hpp"

namespace sns {

using Vec3 = Eigen::Vector3d;

struct ControllerConfig {
  double th1 = 0.010;    // "at" distance (m, L1 over the three axes)
  double th2 = 0.060;    // "far" distance (m)
  double thF = 10.0;     // force detector threshold (mV)
  double lift_dz = 0.040;  // lift height added by the dz primitive (m)
  double open_angle = 60.0;    // deg
  double closed_angle = 10.0;  // deg
  Vec3 offset{-0.1, -0.1, -0.4};  // position mapped to e_lo (m)
  Vec3 gain{40.0, 40.0, 40.0};    // mV per m
  double dt_ctrl = 0.016;         // s
  double detector_gain = 250.0;
  double command_gain = 40.0;
  double shunt = 10000.0;  // V of the relay gating synapses

  void validate() const;
  Vec3 lower() const { return offset; }
  Vec3 upper() const;
};

ControllerConfig controller_config_from_json(const std::string& text);
std::string controller_config_to_json(const ControllerConfig& config);

struct SensorFrame {
  Vec3 gripper = Vec3::Zero();
  Vec3 object = Vec3::Zero();
  Vec3 target = Vec3::Zero();
  bool force = false;
};

struct MotorCommand {
  Vec3 xyz = Vec3::Zero();
  double angle = 0.0;  // deg
};

enum class SubtaskId {
  MoveAboveObject = 1,
  DescendToObject,
  GraspObject,
  LiftObject,
  MoveToTarget,
  LowerToTarget,
  ReleaseObject,
  Retract,
  ReturnedHome,  // label only; no neuron
};

inline constexpr int kSubtaskCount = 8;
std::string_view to_string(SubtaskId id);

/// Weights lifted from trained (or hand-set) arithmetic subnetworks: the
/// difference neurons reuse the subtraction net's output row and the
/// distance neurons the addition net's transmission weight.
struct SubnetWeights {
  double sub_w_plus = 20.0;
  double sub_w_minus = -20.0;
  double sub_b = 0.0;
  double sub_tau = 0.0;
  double add_w = 20.0;
  double add_b = 0.0;
  double add_tau = 0.0;

  /// Reads W/b/tau of the output rows of a subtraction and an addition net.
  static SubnetWeights from_subnets(const NetworkParams& sub, int sub_output,
                                    const NetworkParams& add, int add_output);
};

struct Controller {
  ControllerConfig config;
  NetworkParams params;
  std::vector<std::string> names;
  std::map<std::string, int> index;

  std::array<int, kSubtaskCount> commands{};
  int obj = 0, tar = 0, dz = 0, open = 0;
  std::array<int, 3> motor_xyz{};
  int lc = 0, rc = 0;

  int at(const std::string& name) const;
};

Controller build_controller(const ControllerConfig& config,
                            const SubnetWeights& subnets = {});

/// Clamp values in the order of params.clamped: gripper xyz, object xyz,
/// target xyz, force. Throws EncodeError for positions outside the
/// workspace.
std::vector<double> encode_sensors(const SensorFrame& frame,
                                   const ControllerConfig& config);

/// mV <-> metres / degrees.
double encode_axis(double metres, int axis, const ControllerConfig& config);
double decode_axis(double mv, int axis, const ControllerConfig& config);
double encode_angle(double degrees);
double decode_angle(double mv);

struct ControllerOutput {
  MotorCommand command;
  std::array<double, kSubtaskCount> activities{};
};

/// Settled network state for a frame (used at episode start so the
/// pipeline is not empty).
NeuronState settle_controller(const Controller& ctrl, const SensorFrame& frame);

/// One network update with the encoded frame; decodes the motor layer.
ControllerOutput controller_step(const Controller& ctrl, NeuronState& state,
                                 const SensorFrame& frame);

/// Reads the current motor layer and subtask activities without stepping.
ControllerOutput read_controller(const Controller& ctrl, const NeuronState& state);

/// argmax of the activities if it exceeds 0.5, ties to the lowest index.
std::optional<SubtaskId> dominant_subtask(std::span<const double> activities);

/// NetworkParams JSON plus "names" and "controller_config".
std::string controller_to_json(const Controller& ctrl);

}  // namespace sns
