#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "sns/controller.hpp"
#include "sns/gantry.hpp"

namespace sns {

/// Controller + simulator settings of one pick-and-place run, stored as a
/// single JSON document {"controller": {...}, "sim": {...}, "episode": {...}}.
struct PickPlaceConfig {
  ControllerConfig controller;
  SimConfig sim;
  int max_steps = 5000;
  double tolerance = 0.005;  // m, for object-at-target and gripper-at-home

  void validate() const;
};

PickPlaceConfig pickplace_config_from_json(const std::string& text);
PickPlaceConfig load_pickplace_config(const std::filesystem::path& path);
std::string pickplace_config_to_json(const PickPlaceConfig& config);

struct EpisodeOptions {
  bool force_fault = false;  // the controller never sees contact
};

/// Phase label of a trace step: 0 = no dominant subtask, 1..8 = dominant
/// command neuron, 9 = after the return-home rewrite.
inline constexpr int kNoSubtask = 0;
inline constexpr int kHomeLabel = static_cast<int>(SubtaskId::ReturnedHome);

struct TraceStep {
  double t = 0.0;
  SensorFrame sensors;  // what the controller saw this step
  std::array<double, kSubtaskCount> activities{};
  MotorCommand command;
  GantryState state;  // after the step
  int subtask = kNoSubtask;
};

struct EpisodeSummary {
  bool success = false;
  double object_error = 0.0;   // |object - target| at the end (m)
  double gripper_error = 0.0;  // |gripper - start| at the end (m)
  double duration = 0.0;       // simulated seconds
  int steps = 0;
  bool returned_home = false;  // the object input was rewritten
  std::vector<int> sequence;   // labels with None dropped and repeats collapsed
};

struct EpisodeTrace {
  std::vector<TraceStep> steps;
  EpisodeSummary summary;
};

/// Labels with kNoSubtask removed and consecutive duplicates merged.
std::vector<int> collapse_labels(const std::vector<TraceStep>& steps);

/// Alternates controller_step and sim_step. Once Retract has been dominant
/// and another subtask takes over, the controller's object input is moved
/// to the gripper start so the arm returns home. Stops on success (object
/// within tolerance of the target, gripper at rest within tolerance of its
/// start, object released) or after `max_steps`.
EpisodeTrace run_episode(const Controller& ctrl, const SimConfig& sim,
                         int max_steps, double tolerance = 0.005,
                         const EpisodeOptions& options = {});

/// Same loop through the line protocol and a LoopbackDevice: each control
/// step sends M114, reads the pose and contact, sends G0 and M280, then
/// lets the device run one simulator step. `latency_s` is charged per line.
EpisodeTrace run_episode_via_protocol(const Controller& ctrl, const SimConfig& sim,
                                      int max_steps, double tolerance = 0.005,
                                      double latency_s = 0.0,
                                      const EpisodeOptions& options = {});

}  // namespace sns
