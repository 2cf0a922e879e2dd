#include <gtest/gtest.h>

#include <sstream>

#include "sns/error.hpp"
#include "sns/subnet.hpp"

using namespace sns;

TEST(Topology, DivisionHasTwoLearnableSynapses) {
  const Topology t = build_topology(ArithOp::Div, 1);
  EXPECT_EQ(t.n, 3);
  EXPECT_EQ(t.w_mask.count() + t.v_mask.count(), 2);
  EXPECT_TRUE(t.w_mask(2, 0));
  EXPECT_TRUE(t.v_mask(2, 1));
}

TEST(Topology, ShapesAndFeedforward) {
  for (ArithOp op : {ArithOp::Add, ArithOp::Sub, ArithOp::Div, ArithOp::Mul}) {
    const Topology t = build_topology(op, 2);
    EXPECT_EQ(t.n, op == ArithOp::Mul ? 4 : 3);
    EXPECT_EQ(t.init.clamped, (std::vector<int>{0, 1}));
    EXPECT_EQ(t.output, t.n - 1);
    // feedforward: every synapse goes from a lower to a higher index
    for (int i = 0; i < t.n; ++i) {
      for (int j = i; j < t.n; ++j) EXPECT_FALSE(t.init.mask(i, j)) << to_string(op);
    }
  }
  EXPECT_EQ(build_topology(ArithOp::Add, 1).v_mask.count(), 0);
  EXPECT_EQ(build_topology(ArithOp::Sub, 1).v_mask.count(), 0);
}

TEST(Topology, MultiplierInterneuronStartsInhibitory) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Topology t = build_topology(ArithOp::Mul, seed);
    EXPECT_LT(t.init.W(2, 1), 0.0);
  }
}

TEST(Topology, SeedDeterminism) {
  const Topology a = build_topology(ArithOp::Mul, 5), b = build_topology(ArithOp::Mul, 5);
  EXPECT_EQ(a.init.W, b.init.W);
  EXPECT_EQ(a.init.V, b.init.V);
  EXPECT_EQ(a.init.b, b.init.b);
  EXPECT_EQ(a.w_mask, b.w_mask);
  EXPECT_NE(a.init.W, build_topology(ArithOp::Mul, 6).init.W);
  EXPECT_THROW(build_topology("pow", 1), InvalidParameter);
}

TEST(Exact, DivisionMatchesShuntingFormula) {
  const NetworkParams p = exact_division_params();
  for (double a = 0; a <= 20; a += 5) {
    for (double b = 0; b <= 20; b += 5) {
      EXPECT_NEAR(steady_output(p, 2, a, b), a / (1 + b), 1e-9);
    }
  }
  EXPECT_NEAR(steady_output(p, 2, 10, 4), 2.0, 1e-12);
  EXPECT_LE(contour_max_error(p, ArithOp::Div, 2, 21), 1e-6);
}

TEST(Exact, AdditionSaturatesAndSubtractionRectifies) {
  EXPECT_NEAR(steady_output(exact_addition_params(), 2, 20, 20), 20.0, 1e-12);
  EXPECT_NEAR(steady_output(exact_addition_params(), 2, 7, 5), 12.0, 1e-12);
  EXPECT_NEAR(steady_output(exact_subtraction_params(), 2, 5, 9), 0.0, 1e-12);
  EXPECT_NEAR(steady_output(exact_subtraction_params(), 2, 9, 5), 4.0, 1e-12);
  EXPECT_LE(contour_max_error(exact_addition_params(), ArithOp::Add, 2, 11), 1e-9);
  EXPECT_LE(contour_max_error(exact_subtraction_params(), ArithOp::Sub, 2, 11), 1e-9);
}

TEST(Exact, HandMultiplierCorner) {
  // Output is a b / 20 + a / g on the linear band, so the error is at most 20 / g.
  for (double g : {100.0, 400.0, 2000.0}) {
    const NetworkParams p = hand_multiplier_params(g);
    EXPECT_NEAR(steady_output(p, 3, 20, 20), 20.0, 20.0 / g + 1e-9);
    EXPECT_NEAR(steady_output(p, 3, 10, 4), 2.0 + 10.0 / g, 1e-6);
    EXPECT_LE(contour_max_error(p, ArithOp::Mul, 3, 11), 20.0 / g + 1e-9);
  }
}

TEST(Contour, IdealSubtractionHasZeroPlateau) {
  const Matrix m = ideal_contour(ArithOp::Sub, 11);
  for (int i = 0; i < 11; ++i) {
    for (int j = i; j < 11; ++j) EXPECT_EQ(m(i, j), 0.0);
  }
  EXPECT_EQ(m(10, 0), 20.0);
}

TEST(Contour, CsvLayout) {
  const std::string csv = contour_csv(exact_division_params(), ArithOp::Div, 2, 3);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "a,b,sns,ideal");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 9);
}

TEST(Contour, RejectsTinyGrid) {
  EXPECT_THROW(eval_contour(exact_division_params(), 2, 1), InvalidParameter);
}

TEST(Synapses, ClassifiedByWeightSignAndConductance) {
  int exc = 0, inh = 0, shunt = 0;
  for (const SynapseReport& s : classify_synapses(hand_multiplier_params())) {
    if (s.kind == SynapseKind::Excitatory) ++exc;
    if (s.kind == SynapseKind::Inhibitory) ++inh;
    if (s.kind == SynapseKind::Shunting) ++shunt;
  }
  EXPECT_EQ(exc, 1);    // a -> output
  EXPECT_EQ(inh, 1);    // b -> interneuron
  EXPECT_EQ(shunt, 1);  // interneuron -> output
  for (const SynapseReport& s : classify_synapses(exact_division_params())) {
    if (s.pre == 1) { EXPECT_EQ(s.kind, SynapseKind::Shunting); }
    if (s.pre == 0) { EXPECT_EQ(s.kind, SynapseKind::Excitatory); }
  }
}

TEST(TopologyIo, RoundTrip) {
  const Topology t = build_topology(ArithOp::Mul, 3);
  const LoadedSubnet back = topology_from_json(topology_to_json(t, t.init));
  EXPECT_EQ(back.topology.op, ArithOp::Mul);
  EXPECT_EQ(back.topology.output, t.output);
  EXPECT_EQ(back.topology.w_mask, t.w_mask);
  EXPECT_EQ(back.topology.v_mask, t.v_mask);
  EXPECT_EQ(back.topology.w_sign, t.w_sign);
  EXPECT_EQ(back.topology.warmup, t.warmup);
  EXPECT_EQ(back.params.W, t.init.W);
  EXPECT_EQ(back.params.V, t.init.V);
  EXPECT_THROW(load_subnet("/nonexistent.json"), IoError);
}
