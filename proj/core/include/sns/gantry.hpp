#pragma once

#include <string>

#include "sns/controller.hpp"

namespace sns {

struct SimConfig {
  Vec3 workspace_lo{-0.1, -0.1, -0.4};  // m
  Vec3 workspace_hi{0.4, 0.4, 0.1};
  Vec3 v_max{0.15, 0.10, 0.02};  // m/s; z entry is the upward limit
  double v_max_z_down = 0.04;    // m/s
  Vec3 a_max{1.0, 1.0, 1.0};     // m/s^2
  double grasp_rate = 120.0;     // deg/s
  double capture_radius = 0.015;  // m
  double grasp_angle = 25.0;      // closed at or below this (deg)
  double release_angle = 40.0;    // an attached object drops above this (deg)
  Vec3 object_size{0.039, 0.039, 0.0345};  // m
  double object_mass = 0.0197;             // kg
  double dt = 0.016;                       // s
  Vec3 gripper_start = Vec3::Zero();
  double angle_start = 60.0;  // deg
  Vec3 object_start{0.0, 0.0, -0.305};
  Vec3 target{0.15, 0.15, -0.310};

  void validate() const;
  /// Speed limit for moving along `axis` in direction `sign`.
  double speed_limit(int axis, double sign) const;
};

SimConfig sim_config_from_json(const std::string& text);
std::string sim_config_to_json(const SimConfig& config);

struct GantryState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double angle = 0.0;       // deg
  double angle_rate = 0.0;  // deg/s
  Vec3 object = Vec3::Zero();
  Vec3 grip_offset = Vec3::Zero();  // object - gripper while attached
  bool attached = false;
  bool force = false;
  bool command_clamped = false;  // last command was outside the workspace
  double t = 0.0;

  static GantryState initial(const SimConfig& config);
};

/// Advances one axis by one step of a discrete trapezoidal profile toward
/// `target`: accelerate by at most a*dt per step, cruise at v_max, and
/// brake so the axis stops exactly on the target. Returns {position, velocity}.
std::pair<double, double> trapezoid_step(double position, double velocity,
                                         double target, double v_up,
                                         double v_down, double a_max, double dt);

/// Geometric contact and attachment update for the current pose.
GantryState contact_and_grasp(GantryState state, const SimConfig& config);

/// One step: every axis follows its profile toward the (workspace-clamped)
/// command, the grasper turns at a bounded rate, an attached object moves
/// with the gripper, then contact is re-evaluated.
GantryState sim_step(const GantryState& state, const MotorCommand& command,
                     const SimConfig& config);

}  // namespace sns
