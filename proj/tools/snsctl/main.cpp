#include <iostream>

#include <CLI11.hpp>

#include "snsctl/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Train, check and run synthetic nervous system networks"};
  app.set_version_flag("--version", snsctl::version());
  app.require_subcommand(1);

  snsctl::TrainArgs train;
  std::uint64_t train_seed = 0;
  auto* t = app.add_subcommand("train", "train an arithmetic subnetwork");
  t->add_option("--op", train.op, "add, sub, div or mul")->required();
  t->add_option("--config", train.config, "training config JSON");
  t->add_option("--out", train.out, "output directory")->required();
  t->add_option("--baseline", "also train a baseline (only 'mlp')")
      ->check(CLI::IsMember({"mlp"}))
      ->each([&](const std::string&) { train.mlp_baseline = true; });
  auto* seed_opt = t->add_option("--seed", train_seed, "initialisation and shuffle seed");
  t->add_option("--grid", train.grid, "contour grid points per axis")->capture_default_str();

  snsctl::GradcheckArgs grad;
  auto* g = app.add_subcommand("gradcheck", "compare BPTT gradients with finite differences");
  g->add_option("--seed", grad.seed)->required();
  g->add_option("--nets", grad.nets, "random networks")->capture_default_str();
  g->add_option("--neurons", grad.neurons)->capture_default_str();
  g->add_option("--steps", grad.steps, "sequence length")->capture_default_str();
  g->add_flag("--corrupt", grad.corrupt, "perturb one analytic gradient (self-test)");
  g->add_option("--out", grad.out, "optional output directory");

  snsctl::PickPlaceArgs pick;
  auto* p = app.add_subcommand("pickplace", "run the closed-loop pick-and-place episode");
  p->add_option("--config", pick.config, "pick-and-place config JSON");
  p->add_option("--out", pick.out, "output directory")->required();
  p->add_flag("--via-protocol", pick.via_protocol, "drive a loopback device over the line protocol");
  p->add_option("--latency-ms", pick.latency_ms, "per-line latency (implies --via-protocol)");
  p->add_option("--sub-params", pick.sub_params, "trained sub net for the difference neurons");
  p->add_option("--add-params", pick.add_params, "trained add net for the distance neurons");

  snsctl::ContourArgs contour;
  std::string contour_op;
  double contour_tol = 0.0;
  auto* c = app.add_subcommand("contour", "evaluate a subnetwork on an input grid");
  c->add_option("--params", contour.params, "params JSON")->required();
  c->add_option("--out", contour.out, "CSV path")->required();
  auto* op_opt = c->add_option("--op", contour_op, "override or supply the operation");
  c->add_option("--grid", contour.grid)->capture_default_str();
  auto* tol_opt = c->add_option("--tolerance", contour_tol, "fail above this max error (mV)");

  double echo_latency = 16.0;
  auto* e = app.add_subcommand("echo", "answer protocol lines from stdin with a loopback device");
  e->add_option("--latency-ms", echo_latency, "simulated time per line")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? snsctl::kOk : snsctl::kUsage;
  }

  if (t->parsed()) {
    if (seed_opt->count()) train.seed = train_seed;
    return snsctl::cmd_train(train, std::cout);
  }
  if (g->parsed()) return snsctl::cmd_gradcheck(grad, std::cout);
  if (p->parsed()) return snsctl::cmd_pickplace(pick, std::cout);
  if (c->parsed()) {
    if (op_opt->count()) contour.op = contour_op;
    if (tol_opt->count()) contour.tolerance = contour_tol;
    return snsctl::cmd_contour(contour, std::cout);
  }
  return snsctl::cmd_echo(std::cin, std::cout, echo_latency);
}
