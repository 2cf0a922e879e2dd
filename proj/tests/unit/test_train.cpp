#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "sns/adam.hpp"
#include "sns/bptt.hpp"
#include "sns/dataset.hpp"
#include "sns/error.hpp"
#include "sns/gradcheck.hpp"
#include "sns/mlp.hpp"
#include "sns/subnet.hpp"
#include "sns/train.hpp"

using namespace sns;

namespace {

NetworkParams leak_neuron(double b, double tau, double dt = 0.1) {
  NetworkParams p = NetworkParams::zeros(1, dt);
  p.b[0] = b;
  p.tau[0] = tau;
  return p;
}

Sequence autonomous_sequence(const Vector& target) {
  return {Matrix(target.size(), 0), target};
}

}  // namespace

TEST(IdealOp, Examples) {
  EXPECT_EQ(ideal_op(ArithOp::Add, 7, 5), 12.0);
  EXPECT_EQ(ideal_op(ArithOp::Add, 20, 20), 20.0);
  EXPECT_EQ(ideal_op(ArithOp::Sub, 5, 9), 0.0);
  EXPECT_EQ(ideal_op(ArithOp::Sub, 9, 5), 4.0);
  EXPECT_EQ(ideal_op(ArithOp::Div, 10, 4), 2.0);
  EXPECT_EQ(ideal_op(ArithOp::Mul, 20, 20), 20.0);
  EXPECT_EQ(ideal_op(ArithOp::Mul, 10, 4), 2.0);
  EXPECT_EQ(parse_op("mul"), ArithOp::Mul);
  EXPECT_THROW(parse_op("pow"), InvalidParameter);
}

TEST(Dataset, ConstantFeaturesInRange) {
  const Dataset d = gen_dataset(ArithOp::Div, 200, 50, 0.1, 9);
  ASSERT_EQ(d.examples.size(), 200u);
  for (const Sequence& s : d.examples) {
    ASSERT_EQ(s.inputs.rows(), 50);
    ASSERT_EQ(s.inputs.cols(), 2);
    const double a = s.inputs(0, 0), b = s.inputs(0, 1);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 20.0);
    EXPECT_GE(b, 0.0);
    EXPECT_LE(b, 20.0);
    EXPECT_TRUE((s.inputs.col(0).array() == a).all());
    EXPECT_TRUE((s.inputs.col(1).array() == b).all());
    EXPECT_TRUE((s.target.array() == a / (1 + b)).all());
  }
  const Dataset again = gen_dataset(ArithOp::Div, 200, 50, 0.1, 9);
  EXPECT_EQ(d.examples[17].inputs, again.examples[17].inputs);
}

TEST(MseLoss, Examples) {
  const std::vector<double> x{1, 2, 3};
  EXPECT_EQ(mse_loss(x, x), 0.0);
  const std::vector<double> y{2, 3, 4};
  EXPECT_EQ(mse_loss(y, x), 1.0);
  const std::vector<double> p{0, 2}, l{2, 0};
  EXPECT_EQ(mse_loss(p, l, 0), 4.0);
  const std::vector<double> p2{0, 5}, l2{9, 5};
  EXPECT_EQ(mse_loss(p2, l2, 1), 0.0);
}

TEST(Bptt, LeakBiasGradientIsGeometricSeries) {
  const double b = 6.0, tau = 0.3, dt = 0.1;
  const int T = 25;
  const NetworkParams p = leak_neuron(b, tau, dt);
  Vector y(T);
  for (int t = 0; t < T; ++t) y[t] = 3.0 + 0.1 * t;
  const std::vector<Sequence> batch{autonomous_sequence(y)};

  // h_t = b (1 - r^t) with r = tau / (tau + dt).
  const double r = tau / (tau + dt);
  const double dr_dtau = dt / ((tau + dt) * (tau + dt));
  double db = 0.0, dtau = 0.0;
  for (int t = 1; t <= T; ++t) {
    const double h = b * (1.0 - std::pow(r, t));
    const double err = h - y[t - 1];
    db += 2.0 * err * (1.0 - std::pow(r, t)) / T;
    dtau += 2.0 * err * (-b * t * std::pow(r, t - 1) * dr_dtau) / T;
  }
  const LossAndGrad g = bptt_grad(p, batch, LossSpec{0, 0});
  EXPECT_NEAR(g.grad.b[0], db, 1e-12);
  EXPECT_NEAR(g.grad.tau[0], dtau, 1e-10);
}

TEST(Bptt, ZeroLossGivesZeroGradient) {
  NetworkParams p = random_check_network(4, 21);
  std::vector<Sequence> batch = random_check_batch(p, 3, 10, 5);
  for (Sequence& s : batch) {
    const Matrix traj = simulate(p, s.inputs, Vector::Zero(4));
    for (int t = 0; t < traj.rows(); ++t) s.target[t] = readout(traj(t, 3), p.e_lo, p.e_hi);
  }
  const LossAndGrad g = bptt_grad(p, batch, LossSpec{3, 0});
  EXPECT_LE(g.loss, 1e-24);
  EXPECT_LE(g.grad.max_abs(), 1e-12);
}

TEST(Bptt, AgreesWithFiniteDifferences) {
  GradCheckSpec spec;
  spec.seed = 3;
  spec.nets = 5;
  const GradCheckReport r = gradient_check(spec);
  EXPECT_LE(r.max_rel_error, 1e-4) << r.worst;
  EXPECT_GT(r.evaluated, 0);
  EXPECT_LT(r.skip_fraction(), 0.05);
}

TEST(Bptt, SingleLeakNeuronCheckPasses) {
  GradCheckSpec spec;
  spec.n = 1;
  spec.nets = 10;
  EXPECT_LE(gradient_check(spec).max_rel_error, 1e-4);
}

TEST(Bptt, CorruptionHookIsDetected) {
  GradCheckSpec spec;
  spec.nets = 3;
  spec.corrupt = true;
  EXPECT_GT(gradient_check(spec).max_rel_error, 1e-4);
}

TEST(Bptt, NonFiniteForwardPassThrows) {
  NetworkParams p = leak_neuron(1.0, 0.0);
  std::vector<Sequence> batch{autonomous_sequence(Vector::Zero(3))};
  p.b[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(bptt_grad(p, batch, LossSpec{0, 0}), NumericalFault);
}

TEST(FiniteDiff, ExactOnQuadraticLoss) {
  // tau = 0: h = b every step, loss = (b - y)^2.
  const NetworkParams p = leak_neuron(4.0, 0.0);
  std::vector<Sequence> batch{autonomous_sequence(Vector::Constant(5, 1.5))};
  const FiniteDiffResult fd =
      finite_diff_grad(p, batch, LossSpec{0, 0}, LearnMask::from_params(p), 1e-4);
  EXPECT_NEAR(fd.grad.b[0], 2.0 * (4.0 - 1.5), 1e-8);
}

TEST(FiniteDiff, MaskedEntriesAreExactlyZero) {
  NetworkParams p = random_check_network(4, 8);
  const auto batch = random_check_batch(p, 2, 8, 1);
  LearnMask m = LearnMask::from_params(p);
  m.w(3, 2) = false;
  m.v(2, 0) = false;
  m.tau[2] = false;
  const FiniteDiffResult fd = finite_diff_grad(p, batch, LossSpec{3, 0}, m);
  const LossAndGrad g = bptt_grad(p, batch, LossSpec{3, 0}, m);
  EXPECT_EQ(fd.grad.W(3, 2), 0.0);
  EXPECT_EQ(g.grad.W(3, 2), 0.0);
  EXPECT_EQ(fd.grad.V(2, 0), 0.0);
  EXPECT_EQ(g.grad.V(2, 0), 0.0);
  EXPECT_EQ(fd.grad.tau[2], 0.0);
  EXPECT_EQ(g.grad.tau[2], 0.0);
  EXPECT_TRUE(g.grad.W.row(0).isZero(0.0));  // clamped row
}

TEST(Adam, ZeroGradientLeavesFreshParamsAndDecaysMoments) {
  std::vector<double> x{1.0, -2.0}, g{0.0, 0.0}, m{0.0, 0.0}, v{0.0, 0.0};
  AdamConfig cfg;
  adam_update(x, g, m, v, 1, cfg);
  EXPECT_EQ(x[0], 1.0);
  EXPECT_EQ(x[1], -2.0);

  std::vector<double> m2{0.5, -0.5}, v2{0.25, 0.25};
  adam_update(x, g, m2, v2, 2, cfg);
  EXPECT_DOUBLE_EQ(m2[0], 0.5 * cfg.beta1);
  EXPECT_DOUBLE_EQ(v2[0], 0.25 * cfg.beta2);
}

TEST(Adam, ConstantGradientStepApproachesLearningRate) {
  std::vector<double> x{0.0, 0.0}, g{3.0, -0.01}, m{0.0, 0.0}, v{0.0, 0.0};
  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  for (long t = 1; t <= 2000; ++t) {
    const double before0 = x[0], before1 = x[1];
    adam_update(x, g, m, v, t, cfg);
    if (t == 2000) {
      EXPECT_NEAR(x[0] - before0, -0.01, 1e-6);
      EXPECT_NEAR(x[1] - before1, 0.01, 1e-5);
    }
  }
}

TEST(Adam, ProjectionClipsConductanceAtZero) {
  NetworkParams p = exact_division_params();
  p.V(2, 1) = 0.1;
  const LearnMask mask = LearnMask::from_params(p);
  AdamState st = AdamState::zeros(3);
  Gradients g = Gradients::zeros(3);
  g.V(2, 1) = 5.0;
  AdamConfig cfg;
  cfg.learning_rate = 0.4;
  adam_step(st, p, g, cfg, mask);
  EXPECT_EQ(p.V(2, 1), 0.0);
}

TEST(Adam, ProjectionKeepsMaskSignsAndTau) {
  Topology topo = build_topology(ArithOp::Mul, 4);
  NetworkParams p = topo.init;
  const LearnMask mask = topo.learn_mask();
  AdamState st = AdamState::zeros(p.n);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 50.0);
  for (int k = 0; k < 200; ++k) {
    Gradients g = Gradients::zeros(p.n);
    for (int i = 0; i < p.n; ++i) {
      g.tau[i] = noise(rng);
      g.b[i] = noise(rng);
      for (int j = 0; j < p.n; ++j) {
        g.W(i, j) = noise(rng);
        g.V(i, j) = noise(rng);
      }
    }
    adam_step(st, p, g, AdamConfig{}, mask);
    for (int i = 0; i < p.n; ++i) {
      ASSERT_GE(p.tau[i], 0.0);
      for (int j = 0; j < p.n; ++j) {
        if (!mask.w(i, j)) { ASSERT_EQ(p.W(i, j), topo.init.W(i, j)); }
        if (!mask.v(i, j)) { ASSERT_EQ(p.V(i, j), topo.init.V(i, j)); }
        if (!p.mask(i, j)) {
          ASSERT_EQ(p.W(i, j), 0.0);
          ASSERT_EQ(p.V(i, j), 0.0);
        }
        ASSERT_GE(p.V(i, j), 0.0);
        if (mask.w_sign(i, j) > 0) { ASSERT_GE(p.W(i, j), 0.0); }
        if (mask.w_sign(i, j) < 0) { ASSERT_LE(p.W(i, j), 0.0); }
      }
    }
  }
}

TEST(Train, AdditionConvergesAndIsDeterministic) {
  TrainConfig cfg;
  cfg.epochs = 100;
  const Dataset data = gen_dataset(ArithOp::Add, 1000, 50, 0.1, 1);
  const Topology topo = build_topology(ArithOp::Add, 1);
  const TrainResult a = train(topo, data, cfg);
  const TrainResult b = train(topo, data, cfg);
  EXPECT_EQ(a.curve.mse, b.curve.mse);
  EXPECT_EQ(a.params.W, b.params.W);
  EXPECT_LT(a.curve.final_mse(), 0.01);
  ASSERT_EQ(a.curve.size(), 100u);
  ASSERT_EQ(a.curve.seconds.size(), 100u);
}

TEST(Train, ReturnsBestParametersSeen) {
  TrainConfig cfg;
  cfg.epochs = 25;
  cfg.seed = 3;
  const Dataset data = gen_dataset(ArithOp::Div, 200, 50, 0.1, 2);
  const Topology topo = build_topology(ArithOp::Div, 3);
  const TrainResult r = train(topo, data, cfg);
  const double loss = batch_loss(r.params, data.examples, loss_spec(topo, cfg));
  EXPECT_DOUBLE_EQ(loss, r.curve.best_mse());
  EXPECT_LE(loss, batch_loss(topo.init, data.examples, loss_spec(topo, cfg)));
  ASSERT_GT(r.best_epoch, 0);
  EXPECT_EQ(r.curve.mse[static_cast<std::size_t>(r.best_epoch - 1)], r.curve.best_mse());
  for (int i = 0; i < topo.n; ++i) {
    for (int j = 0; j < topo.n; ++j) {
      if (!topo.init.mask(i, j)) {
        EXPECT_EQ(r.params.W(i, j), 0.0);
        EXPECT_EQ(r.params.V(i, j), 0.0);
      }
    }
  }
}

TEST(Train, StopsEarlyBelowThreshold) {
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.stop_mse = 1.0;
  const Dataset data = gen_dataset(ArithOp::Add, 100, 50, 0.1, 1);
  const TrainResult r = train(build_topology(ArithOp::Add, 1), data, cfg);
  EXPECT_LT(r.curve.size(), 300u);
  EXPECT_LT(r.curve.final_mse(), 1.0);
}

TEST(Train, NonFiniteTargetsDiverge) {
  Dataset data = gen_dataset(ArithOp::Add, 10, 10, 0.1, 1);
  data.examples[0].target[4] = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  cfg.epochs = 2;
  EXPECT_THROW(train(build_topology(ArithOp::Add, 1), data, cfg), TrainingDiverged);
}

TEST(TrainConfig, JsonRoundTripAndValidation) {
  TrainConfig c;
  c.epochs = 7;
  c.adam.learning_rate = 0.02;
  c.output = 2;
  const TrainConfig d = train_config_from_json(train_config_to_json(c));
  EXPECT_EQ(d.epochs, 7);
  EXPECT_EQ(d.adam.learning_rate, 0.02);
  EXPECT_EQ(d.output, 2);
  EXPECT_THROW(train_config_from_json("{\"epochs\": 0}"), InvalidParameter);
  EXPECT_THROW(train_config_from_json("{\"beta1\": 1.0}"), InvalidParameter);
  EXPECT_THROW(train_config_from_json("[1, 2"), InvalidParameter);
}

TEST(LossCurve, CsvAndEpochsTo) {
  LossCurve c{{4.0, 0.5, 0.005, 0.001}, {0.1, 0.1, 0.1, 0.1}};
  EXPECT_EQ(c.epochs_to(0.01), 3);
  EXPECT_EQ(c.epochs_to(1e-9), -1);
  EXPECT_EQ(c.best_mse(), 0.001);
  const std::string csv = loss_curve_csv(c);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,mse,seconds");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(Mlp, ZeroWeightsOutputTheBias) {
  MlpParams m = MlpParams::zeros({2, 1});
  m.b[0][0] = 7.0;
  EXPECT_EQ(mlp_eval(m, 3.0, 11.0), 7.0);
  MlpParams deep = MlpParams::zeros({2, 2, 1});
  deep.b[1][0] = 4.5;
  EXPECT_EQ(mlp_eval(deep, 20.0, 20.0), 4.5);
  EXPECT_EQ(deep.parameter_count(), 9);
}

TEST(Mlp, BaselineShapes) {
  EXPECT_EQ(mlp_baseline(ArithOp::Add, 1).sizes, (std::vector<int>{2, 1}));
  EXPECT_EQ(mlp_baseline(ArithOp::Div, 1).sizes, (std::vector<int>{2, 1}));
  EXPECT_EQ(mlp_baseline(ArithOp::Mul, 1).sizes, (std::vector<int>{2, 2, 1}));
}

TEST(Mlp, LearnsAdditionAndRoundTrips) {
  TrainConfig cfg;
  cfg.epochs = 100;
  const Dataset data = gen_dataset(ArithOp::Add, 1000, 50, 0.1, 1);
  const MlpTrainResult r = mlp_train(mlp_baseline(ArithOp::Add, 1), data, cfg);
  EXPECT_LT(r.curve.final_mse(), 0.01);
  EXPECT_DOUBLE_EQ(mlp_loss(r.params, data.examples), r.curve.best_mse());
  const MlpParams back = mlp_from_json(mlp_to_json(r.params));
  EXPECT_EQ(back.W[0], r.params.W[0]);
  EXPECT_EQ(back.b[0], r.params.b[0]);
}

TEST(Mlp, CannotDivide) {
  TrainConfig cfg;
  cfg.epochs = 40;
  const Dataset data = gen_dataset(ArithOp::Div, 200, 50, 0.1, 1);
  const MlpTrainResult r = mlp_train(mlp_baseline(ArithOp::Div, 1), data, cfg);
  EXPECT_GT(r.curve.best_mse(), 0.1);
}
