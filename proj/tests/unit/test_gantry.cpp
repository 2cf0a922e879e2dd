#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "sns/error.hpp"
#include "sns/gantry.hpp"

using namespace sns;

namespace {

// Runs one axis to `d` from rest; returns {arrival time, peak speed}.
std::pair<double, double> move_1d(double d, double v_max, double a, double dt) {
  double p = 0.0, v = 0.0, peak = 0.0;
  for (int k = 1; k < 100000; ++k) {
    std::tie(p, v) = trapezoid_step(p, v, d, v_max, v_max, a, dt);
    peak = std::max(peak, std::abs(v));
    if (p == d && v == 0.0) return {k * dt, peak};
  }
  return {-1.0, peak};
}

}  // namespace

TEST(Trapezoid, CruiseMoveArrivesOnTime) {
  const double dt = 0.016;
  const auto [t, peak] = move_1d(0.15, 0.1, 1.0, dt);
  EXPECT_NEAR(t, 0.15 / 0.1 + 0.1 / 1.0, dt + 1e-9);
  EXPECT_NEAR(peak, 0.1, 1e-12);
}

TEST(Trapezoid, ShortMoveIsTriangular) {
  const double dt = 0.001, d = 0.004, a = 1.0;
  ASSERT_LT(d, 2.0 * (0.1 * 0.1 / (2.0 * a)));
  const auto [t, peak] = move_1d(d, 0.1, a, dt);
  EXPECT_GT(t, 0.0);
  EXPECT_LT(peak, 0.1);
  EXPECT_NEAR(peak, std::sqrt(a * d), 2.0 * a * dt);
  EXPECT_NEAR(t, 2.0 * std::sqrt(d / a), 2.0 * dt);
}

TEST(Trapezoid, AtTargetStaysPut) {
  const auto [p, v] = trapezoid_step(0.3, 0.0, 0.3, 0.1, 0.1, 1.0, 0.016);
  EXPECT_EQ(p, 0.3);
  EXPECT_EQ(v, 0.0);
}

TEST(Trapezoid, ReversalBrakesFirst) {
  auto [p, v] = trapezoid_step(0.0, 0.1, -0.2, 0.1, 0.1, 1.0, 0.016);
  EXPECT_GT(v, 0.0);
  EXPECT_NEAR(v, 0.1 - 0.016, 1e-12);
  for (int k = 0; k < 400; ++k) std::tie(p, v) = trapezoid_step(p, v, -0.2, 0.1, 0.1, 1.0, 0.016);
  EXPECT_EQ(p, -0.2);
  EXPECT_EQ(v, 0.0);
}

TEST(SimStep, CommandAtPositionChangesNothing) {
  const SimConfig cfg;
  GantryState s = GantryState::initial(cfg);
  MotorCommand c{s.position, s.angle};
  const GantryState next = sim_step(s, c, cfg);
  EXPECT_EQ(next.position, s.position);
  EXPECT_TRUE(next.velocity.isZero(0.0));
  EXPECT_EQ(next.angle, s.angle);
  EXPECT_EQ(next.object, s.object);
  EXPECT_DOUBLE_EQ(next.t, cfg.dt);
}

TEST(SimStep, NonFiniteCommandFaults) {
  const SimConfig cfg;
  MotorCommand c;
  c.xyz.x() = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(sim_step(GantryState::initial(cfg), c, cfg), NumericalFault);
}

TEST(SimStep, OutOfWorkspaceCommandIsClamped) {
  const SimConfig cfg;
  GantryState s = GantryState::initial(cfg);
  const MotorCommand c{{5.0, 0.0, 0.0}, 60.0};
  for (int k = 0; k < 500; ++k) s = sim_step(s, c, cfg);
  EXPECT_TRUE(s.command_clamped);
  EXPECT_DOUBLE_EQ(s.position.x(), cfg.workspace_hi.x());
}

TEST(SimStep, RandomCommandsRespectLimits) {
  SimConfig cfg;
  cfg.object_start = {0.3, 0.3, -0.35};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> x(-0.1, 0.4), z(-0.4, 0.1), ang(0, 90);
  GantryState s = GantryState::initial(cfg);
  MotorCommand c;
  for (int k = 0; k < 5000; ++k) {
    if (k % 40 == 0) c = {{x(rng), x(rng), z(rng)}, ang(rng)};
    const GantryState next = sim_step(s, c, cfg);
    for (int a = 0; a < 3; ++a) {
      const double rate = std::abs(next.position[a] - s.position[a]) / cfg.dt;
      const double limit = a == 2 ? std::max(cfg.v_max.z(), cfg.v_max_z_down) : cfg.v_max[a];
      ASSERT_LE(rate, limit + 1e-9) << "step " << k << " axis " << a;
      ASSERT_LE(std::abs(next.velocity[a]), limit + 1e-12);
      ASSERT_GE(next.position[a], cfg.workspace_lo[a] - 1e-12);
      ASSERT_LE(next.position[a], cfg.workspace_hi[a] + 1e-12);
    }
    ASSERT_LE(std::abs(next.angle - s.angle), cfg.grasp_rate * cfg.dt + 1e-12);
    ASSERT_NEAR(next.t - s.t, cfg.dt, 1e-12);
    s = next;
  }
}

TEST(Contact, ClosedAtObjectAttaches) {
  SimConfig cfg;
  GantryState s = GantryState::initial(cfg);
  s.position = cfg.object_start;
  s.angle = 10.0;
  s = contact_and_grasp(s, cfg);
  EXPECT_TRUE(s.force);
  EXPECT_TRUE(s.attached);
}

TEST(Contact, FarAwayNoContact) {
  SimConfig cfg;
  GantryState s = GantryState::initial(cfg);
  s.position = cfg.object_start + Vec3(0.05, 0.0, 0.0);
  s.angle = 10.0;
  s = contact_and_grasp(s, cfg);
  EXPECT_FALSE(s.force);
  EXPECT_FALSE(s.attached);
}

TEST(Contact, CarryRigidlyThenRelease) {
  SimConfig cfg;
  GantryState s = GantryState::initial(cfg);
  s.position = cfg.object_start + Vec3(0.0, 0.0, 0.01);
  s.angle = 10.0;
  s = contact_and_grasp(s, cfg);
  ASSERT_TRUE(s.attached);
  const Vec3 offset = s.object - s.position;
  MotorCommand c{{0.2, 0.1, -0.2}, 10.0};
  for (int k = 0; k < 300; ++k) {
    s = sim_step(s, c, cfg);
    ASSERT_TRUE(s.attached);
    ASSERT_LE((s.object - s.position - offset).cwiseAbs().maxCoeff(), 1e-12);
  }
  c.angle = 60.0;
  for (int k = 0; k < 40; ++k) s = sim_step(s, c, cfg);
  EXPECT_FALSE(s.attached);
  const Vec3 dropped = s.object;
  c.xyz = {0.0, 0.0, 0.0};
  for (int k = 0; k < 100; ++k) s = sim_step(s, c, cfg);
  EXPECT_EQ(s.object, dropped);
}

TEST(SimConfig, ValidationAndJson) {
  SimConfig c;
  c.a_max.y() = 0.0;
  EXPECT_THROW(c.validate(), InvalidParameter);
  c = SimConfig{};
  c.v_max_z_down = 0.05;
  c.target = {0.1, 0.2, -0.3};
  const SimConfig d = sim_config_from_json(sim_config_to_json(c));
  EXPECT_EQ(d.v_max_z_down, 0.05);
  EXPECT_EQ(d.target, c.target);
  EXPECT_EQ(d.speed_limit(2, -1.0), 0.05);
  EXPECT_EQ(d.speed_limit(2, 1.0), c.v_max.z());
  EXPECT_THROW(sim_config_from_json("{\"dt\": -1}"), InvalidParameter);
}
