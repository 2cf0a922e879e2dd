#include <benchmark/benchmark.h>

#include "sns/bptt.hpp"
#include "sns/episode.hpp"
#include "sns/gradcheck.hpp"
#include "sns/subnet.hpp"
#include "sns/train.hpp"

using namespace sns;

static void BM_StepRandom(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const NetworkParams p = random_check_network(n, 1);
  NeuronState s = NeuronState::zeros(n);
  const std::vector<double> in(p.clamped.size(), 10.0);
  for (auto _ : state) {
    s = step(p, s, in);
    benchmark::DoNotOptimize(s.h.data());
  }
}
BENCHMARK(BM_StepRandom)->Arg(4)->Arg(16)->Arg(64);

static void BM_ControllerStep(benchmark::State& state) {
  const Controller c = build_controller(ControllerConfig{});
  SensorFrame f;
  f.object = {0.0, 0.0, -0.305};
  f.target = {0.15, 0.15, -0.31};
  NeuronState s = settle_controller(c, f);
  for (auto _ : state) {
    const ControllerOutput out = controller_step(c, s, f);
    benchmark::DoNotOptimize(out.command.xyz.data());
  }
}
BENCHMARK(BM_ControllerStep);

static void BM_BpttGrad(benchmark::State& state) {
  const Topology topo = build_topology(ArithOp::Mul, 1);
  const Dataset data = gen_dataset(ArithOp::Mul, 32, 50, 0.1, 1);
  const LossSpec spec{topo.output, topo.warmup};
  const LearnMask mask = topo.learn_mask();
  for (auto _ : state) {
    const LossAndGrad g = bptt_grad(topo.init, data.examples, spec, mask);
    benchmark::DoNotOptimize(g.loss);
  }
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_BpttGrad);

static void BM_TrainEpoch(benchmark::State& state) {
  const ArithOp op = static_cast<ArithOp>(state.range(0));
  const Dataset data = gen_dataset(op, 1000, 50, 0.1, 1);
  const Topology topo = build_topology(op, 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) {
    const TrainResult r = train(topo, data, cfg);
    benchmark::DoNotOptimize(r.curve.mse.data());
  }
  state.SetLabel(std::string(to_string(op)));
}
BENCHMARK(BM_TrainEpoch)
    ->Arg(static_cast<int>(ArithOp::Add))
    ->Arg(static_cast<int>(ArithOp::Mul))
    ->Unit(benchmark::kMillisecond);

static void BM_Episode(benchmark::State& state) {
  const PickPlaceConfig cfg;
  const Controller c = build_controller(cfg.controller);
  const bool protocol = state.range(0) != 0;
  for (auto _ : state) {
    const EpisodeTrace tr =
        protocol ? run_episode_via_protocol(c, cfg.sim, cfg.max_steps, cfg.tolerance)
                 : run_episode(c, cfg.sim, cfg.max_steps, cfg.tolerance);
    benchmark::DoNotOptimize(tr.summary.success);
  }
  state.SetLabel(protocol ? "loopback protocol" : "direct");
}
BENCHMARK(BM_Episode)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
