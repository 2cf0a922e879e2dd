#include <gtest/gtest.h>

#include <algorithm>

#include "sns/episode.hpp"
#include "sns/error.hpp"
#include "sns/trace_io.hpp"

using namespace sns;

namespace {

const EpisodeTrace& default_episode() {
  static const EpisodeTrace trace = [] {
    const PickPlaceConfig cfg;
    return run_episode(build_controller(cfg.controller), cfg.sim, cfg.max_steps, cfg.tolerance);
  }();
  return trace;
}

}  // namespace

TEST(Episode, DefaultScenarioSucceedsInOrder) {
  const EpisodeTrace& tr = default_episode();
  EXPECT_TRUE(tr.summary.success);
  EXPECT_TRUE(tr.summary.returned_home);
  EXPECT_EQ(tr.summary.sequence, (std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9}));
  EXPECT_LE(tr.summary.object_error, 0.005);
  EXPECT_LE(tr.summary.gripper_error, 0.005);
  EXPECT_LT(tr.summary.duration, 60.0);
  const Vec3 obj = tr.steps.back().state.object;
  EXPECT_LE(std::hypot(obj.x() - 0.15, obj.y() - 0.15), 0.005);
}

TEST(Episode, AtMostOneCommandActivePerStep) {
  for (const TraceStep& s : default_episode().steps) {
    const auto active = std::count_if(s.activities.begin(), s.activities.end(),
                                      [](double a) { return a > 0.5; });
    ASSERT_LE(active, 1) << "t = " << s.t;
  }
}

TEST(Episode, SubtaskLabelsNeverGoBackwards) {
  int last = 0;
  for (const TraceStep& s : default_episode().steps) {
    if (s.subtask == kNoSubtask) continue;
    ASSERT_GE(s.subtask, last) << "t = " << s.t;
    last = s.subtask;
  }
}

TEST(Episode, KinematicInvariantsHoldAlongTheTrace) {
  const SimConfig sim;
  const auto& steps = default_episode().steps;
  for (std::size_t k = 1; k < steps.size(); ++k) {
    const GantryState& a = steps[k - 1].state;
    const GantryState& b = steps[k].state;
    ASSERT_NEAR(b.t - a.t, sim.dt, 1e-9);
    for (int ax = 0; ax < 3; ++ax) {
      const double limit = ax == 2 ? std::max(sim.v_max.z(), sim.v_max_z_down) : sim.v_max[ax];
      ASSERT_LE(std::abs(b.position[ax] - a.position[ax]), limit * sim.dt + 1e-9);
    }
    if (a.attached && b.attached) {
      ASSERT_LE(((b.object - b.position) - (a.object - a.position)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Episode, ReproducibleBitForBit) {
  const PickPlaceConfig cfg;
  const EpisodeTrace again =
      run_episode(build_controller(cfg.controller), cfg.sim, cfg.max_steps, cfg.tolerance);
  EXPECT_EQ(trace_csv(again), trace_csv(default_episode()));
  EXPECT_EQ(trace_jsonl(again), trace_jsonl(default_episode()));
}

TEST(Episode, MissingForceSensorStallsBeforeLifting) {
  const PickPlaceConfig cfg;
  EpisodeOptions fault;
  fault.force_fault = true;
  const EpisodeTrace tr =
      run_episode(build_controller(cfg.controller), cfg.sim, 2000, cfg.tolerance, fault);
  EXPECT_FALSE(tr.summary.success);
  for (const TraceStep& s : tr.steps) ASSERT_LE(s.subtask, 3);
  EXPECT_EQ(tr.summary.sequence.back(), 3);
}

TEST(Episode, ProtocolRunMatchesDirectRun) {
  const PickPlaceConfig cfg;
  const Controller c = build_controller(cfg.controller);
  const EpisodeTrace direct = run_episode(c, cfg.sim, cfg.max_steps, cfg.tolerance);
  const EpisodeTrace proto =
      run_episode_via_protocol(c, cfg.sim, cfg.max_steps, cfg.tolerance, 0.0);
  EXPECT_EQ(proto.summary.success, direct.summary.success);
  EXPECT_NEAR(proto.summary.object_error, direct.summary.object_error, 1e-6);
  EXPECT_NEAR(proto.summary.gripper_error, direct.summary.gripper_error, 1e-6);
  EXPECT_EQ(proto.summary.sequence, direct.summary.sequence);
}

TEST(Episode, BadArgumentsRejected) {
  const PickPlaceConfig cfg;
  const Controller c = build_controller(cfg.controller);
  EXPECT_THROW(run_episode(c, cfg.sim, 0), InvalidParameter);
  EXPECT_THROW(run_episode(c, cfg.sim, 10, -1.0), InvalidParameter);
  SimConfig outside = cfg.sim;
  outside.object_start = {0.5, 0.0, 0.0};
  EXPECT_THROW(run_episode(c, outside, 10), Error);
}

TEST(PickPlaceConfig, JsonRoundTrip) {
  PickPlaceConfig cfg;
  cfg.max_steps = 1234;
  cfg.controller.th2 = 0.05;
  cfg.sim.object_start = {0.05, 0.0, -0.3};
  const PickPlaceConfig back = pickplace_config_from_json(pickplace_config_to_json(cfg));
  EXPECT_EQ(back.max_steps, 1234);
  EXPECT_EQ(back.controller.th2, 0.05);
  EXPECT_EQ(back.sim.object_start, cfg.sim.object_start);
  PickPlaceConfig mismatch;
  mismatch.sim.dt = 0.02;
  EXPECT_THROW(mismatch.validate(), InvalidParameter);
  EXPECT_THROW(pickplace_config_from_json("{\"episode\": {\"max_steps\": 0}}"), InvalidParameter);
  EXPECT_THROW(load_pickplace_config("/nonexistent.json"), IoError);
}

TEST(Trace, JsonlRoundTripIsExact) {
  const EpisodeTrace& tr = default_episode();
  const EpisodeTrace back = trace_from_jsonl(trace_jsonl(tr));
  ASSERT_EQ(back.steps.size(), tr.steps.size());
  EXPECT_EQ(trace_jsonl(back), trace_jsonl(tr));
  EXPECT_EQ(back.summary.sequence, tr.summary.sequence);
  EXPECT_EQ(back.summary.steps, tr.summary.steps);
  EXPECT_EQ(back.summary.object_error, tr.summary.object_error);
}

TEST(Trace, CsvRoundTripIsExactOnItsColumns) {
  const EpisodeTrace& tr = default_episode();
  const std::string csv = trace_csv(tr);
  const EpisodeTrace back = trace_from_csv(csv);
  EXPECT_EQ(trace_csv(back), csv);
  EXPECT_EQ(back.summary.sequence, tr.summary.sequence);
  EXPECT_EQ(back.steps.back().state.position, tr.steps.back().state.position);
}

TEST(Trace, EmptyTraceIsHeaderOnly) {
  EpisodeTrace empty;
  EXPECT_EQ(trace_csv(empty), "t,x,y,z,theta,obj_x,obj_y,obj_z,force,subtask\n");
  EXPECT_EQ(trace_jsonl(empty), "");
  EXPECT_TRUE(trace_from_csv(trace_csv(empty)).steps.empty());
  EXPECT_THROW(trace_from_csv("wrong header\n"), InvalidParameter);
  EXPECT_THROW(trace_from_csv("t,x,y,z,theta,obj_x,obj_y,obj_z,force,subtask\n1,2\n"),
               InvalidParameter);
}

TEST(Trace, SummaryJsonNamesThePhases) {
  const std::string s = summary_json(default_episode().summary);
  EXPECT_NE(s.find("\"success\": true"), std::string::npos);
  EXPECT_NE(s.find("MoveAboveObject"), std::string::npos);
  EXPECT_NE(s.find("ReturnedHome"), std::string::npos);
}
