#include "snsctl/commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sns/episode.hpp"
#include "sns/error.hpp"
#include "sns/gradcheck.hpp"
#include "sns/mlp.hpp"
#include "sns/network_io.hpp"
#include "sns/protocol.hpp"
#include "sns/subnet.hpp"
#include "sns/trace_io.hpp"
#include "sns/train.hpp"

#ifndef SNSCTL_VERSION
#define SNSCTL_VERSION "unknown"
#endif

namespace fs = std::filesystem;

namespace snsctl {

std::string version() { return SNSCTL_VERSION; }

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0')
      << ms << 'Z';
  return out.str();
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sns::IoError("cannot open for writing", path.string());
  out << text;
  if (!out) throw sns::IoError("write failed", path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sns::IoError("cannot open for reading", path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool make_out_dir(const fs::path& dir, std::ostream& log) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    log << "error: cannot create " << dir << ": " << ec.message() << '\n';
    return false;
  }
  return true;
}

RunManifest start_manifest(std::string subcommand, const fs::path& config, const fs::path& out) {
  RunManifest m;
  m.subcommand = std::move(subcommand);
  m.config = config.string();
  m.out = out.string();
  m.version = version();
  m.started = utc_now();
  return m;
}

int finish(RunManifest& m, const fs::path& dir, int code, std::ostream& log) {
  m.exit_code = code;
  m.finished = utc_now();
  try {
    write_manifest(dir, m);
  } catch (const sns::Error& e) {
    log << "error: " << e.what() << '\n';
    return kUsage;
  }
  return code;
}

// Numerical trouble maps to kFailure, everything else the library raises
// (bad parameters, files, parse errors) to kUsage.
int classify(const sns::Error& e, std::ostream& log) {
  log << "error: " << e.what() << '\n';
  if (dynamic_cast<const sns::NumericalFault*>(&e) ||
      dynamic_cast<const sns::NonConvergence*>(&e) ||
      dynamic_cast<const sns::TrainingDiverged*>(&e) ||
      dynamic_cast<const sns::EncodeError*>(&e)) {
    return kFailure;
  }
  return kUsage;
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

}  // namespace

void write_manifest(const fs::path& dir, const RunManifest& m) {
  nlohmann::json j;
  j["subcommand"] = m.subcommand;
  j["config"] = m.config;
  j["seed"] = m.seed ? nlohmann::json(*m.seed) : nlohmann::json(nullptr);
  j["out"] = m.out;
  j["version"] = m.version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["exit_code"] = m.exit_code;
  write_file(dir / "manifest.json", j.dump(2) + "\n");
}

double grid_criterion(const std::string& op) {
  const sns::ArithOp o = sns::parse_op(op);
  return (o == sns::ArithOp::Add || o == sns::ArithOp::Sub) ? 0.5 : 1.0;
}

int cmd_train(const TrainArgs& args, std::ostream& log) {
  RunManifest manifest = start_manifest("train", args.config, args.out);
  sns::ArithOp op{};
  sns::TrainConfig config;
  try {
    op = sns::parse_op(args.op);
    if (!args.config.empty()) config = sns::load_train_config(args.config);
    if (args.seed) {
      config.seed = *args.seed;
      config.init_seed = *args.seed;
    }
    config.validate();
    if (args.grid < 2) throw sns::InvalidParameter("--grid must be >= 2");
  } catch (const sns::Error& e) {
    log << "error: " << e.what() << '\n';
    return kUsage;
  }
  manifest.seed = config.init_seed;
  if (!make_out_dir(args.out, log)) return kUsage;

  int code = kOk;
  try {
    const sns::Dataset data =
        sns::gen_dataset(op, config.examples, config.seq_len, config.dt, config.data_seed);
    const sns::Topology topo = sns::build_topology(op, config.init_seed, config.dt);
    const sns::TrainResult result = sns::train(topo, data, config);

    write_file(args.out / "params.json", sns::topology_to_json(topo, result.params) + "\n");
    write_file(args.out / "loss.csv", sns::loss_curve_csv(result.curve));
    const int output = config.output.value_or(topo.output);
    write_file(args.out / "contour.csv", sns::contour_csv(result.params, op, output, args.grid));
    const double grid_error = sns::contour_max_error(result.params, op, output, args.grid);
    const double limit = grid_criterion(args.op);

    log << "sns " << args.op << ": final mse " << fmt(result.curve.final_mse()) << " mV^2, best "
        << fmt(result.curve.best_mse()) << " (epoch " << result.best_epoch
        << "), grid max error " << fmt(grid_error) << " mV (limit " << limit << ")\n";

    if (args.mlp_baseline) {
      const sns::MlpTrainResult mlp =
          sns::mlp_train(sns::mlp_baseline(op, config.init_seed), data, config);
      write_file(args.out / "mlp_params.json", sns::mlp_to_json(mlp.params) + "\n");
      write_file(args.out / "mlp_loss.csv", sns::loss_curve_csv(mlp.curve));
      const double ratio = mlp.curve.final_mse() / result.curve.final_mse();
      log << "mlp " << args.op << ": final mse " << fmt(mlp.curve.final_mse())
          << " mV^2, mlp/sns ratio " << fmt(ratio) << '\n';
    }
    if (!(grid_error <= limit)) code = kFailure;
  } catch (const sns::Error& e) {
    code = classify(e, log);
  }
  return finish(manifest, args.out, code, log);
}

int cmd_gradcheck(const GradcheckArgs& args, std::ostream& log) {
  RunManifest manifest = start_manifest("gradcheck", {}, args.out);
  manifest.seed = args.seed;
  sns::GradCheckSpec spec;
  spec.seed = args.seed;
  spec.nets = args.nets;
  spec.n = args.neurons;
  spec.T = args.steps;
  spec.corrupt = args.corrupt;
  if (spec.nets < 1 || spec.n < 1 || spec.T < 1) {
    log << "error: --nets, --neurons and --steps must be >= 1\n";
    return kUsage;
  }
  if (!args.out.empty() && !make_out_dir(args.out, log)) return kUsage;

  constexpr double kTolerance = 1e-4;
  int code = kOk;
  try {
    const sns::GradCheckReport r = sns::gradient_check(spec);
    log << "max relative error " << fmt(r.max_rel_error, 3) << " over " << r.evaluated
        << " entries, " << r.skipped << " skipped at kinks";
    if (!r.worst.empty()) log << " (worst: " << r.worst << ")";
    log << '\n';
    code = r.max_rel_error <= kTolerance ? kOk : kFailure;
    if (!args.out.empty()) {
      nlohmann::json j = {{"max_rel_error", r.max_rel_error},
                          {"evaluated", r.evaluated},
                          {"skipped", r.skipped},
                          {"worst", r.worst},
                          {"tolerance", kTolerance},
                          {"pass", code == kOk}};
      write_file(args.out / "gradcheck.json", j.dump(2) + "\n");
    }
  } catch (const sns::Error& e) {
    code = classify(e, log);
  }
  log << (code == kOk ? "PASS" : "FAIL") << '\n';
  if (args.out.empty()) return code;
  return finish(manifest, args.out, code, log);
}

int cmd_pickplace(const PickPlaceArgs& args, std::ostream& log) {
  RunManifest manifest = start_manifest("pickplace", args.config, args.out);
  sns::PickPlaceConfig config;
  sns::SubnetWeights weights;
  try {
    if (!args.config.empty()) config = sns::load_pickplace_config(args.config);
    config.validate();
    if (args.sub_params.empty() != args.add_params.empty()) {
      throw sns::InvalidParameter("--sub-params and --add-params must be given together");
    }
    if (!args.sub_params.empty()) {
      const sns::LoadedSubnet sub = sns::load_subnet(args.sub_params);
      const sns::LoadedSubnet add = sns::load_subnet(args.add_params);
      if (sub.topology.op != sns::ArithOp::Sub || add.topology.op != sns::ArithOp::Add) {
        throw sns::InvalidParameter("expected a sub net for --sub-params and an add net for --add-params");
      }
      weights = sns::SubnetWeights::from_subnets(sub.params, sub.topology.output, add.params,
                                                 add.topology.output);
    }
    if (!(args.latency_ms >= 0.0)) throw sns::InvalidParameter("--latency-ms must be >= 0");
  } catch (const sns::Error& e) {
    log << "error: " << e.what() << '\n';
    return kUsage;
  }
  if (!make_out_dir(args.out, log)) return kUsage;

  int code = kOk;
  try {
    const sns::Controller ctrl = sns::build_controller(config.controller, weights);
    const bool via_protocol = args.via_protocol || args.latency_ms > 0.0;
    const sns::EpisodeTrace trace =
        via_protocol ? sns::run_episode_via_protocol(ctrl, config.sim, config.max_steps,
                                                     config.tolerance, args.latency_ms / 1000.0)
                     : sns::run_episode(ctrl, config.sim, config.max_steps, config.tolerance);
    sns::export_trace(trace, args.out / "trace.csv", args.out / "trace.jsonl");
    write_file(args.out / "summary.json", sns::summary_json(trace.summary) + "\n");

    const sns::EpisodeSummary& s = trace.summary;
    log << (s.success ? "success" : "failure") << ": " << s.steps << " steps, " << fmt(s.duration)
        << " s simulated, object error " << fmt(s.object_error * 1000.0) << " mm, gripper error "
        << fmt(s.gripper_error * 1000.0) << " mm\nsequence:";
    for (int k : s.sequence) log << ' ' << k;
    log << '\n';
    code = s.success ? kOk : kFailure;
  } catch (const sns::Error& e) {
    code = classify(e, log);
  }
  return finish(manifest, args.out, code, log);
}

int cmd_contour(const ContourArgs& args, std::ostream& log) {
  const fs::path dir = args.out.has_parent_path() ? args.out.parent_path() : fs::path(".");
  RunManifest manifest = start_manifest("contour", args.params, args.out);
  sns::NetworkParams params;
  sns::ArithOp op{};
  int output = 0;
  try {
    if (args.grid < 2) throw sns::InvalidParameter("--grid must be >= 2");
    const std::string text = read_file(args.params);
    bool has_topology = false;
    try {
      has_topology = nlohmann::json::parse(text).contains("topology");
    } catch (const nlohmann::json::exception& e) {
      throw sns::InvalidParameter(args.params.string() + ": " + e.what());
    }
    if (has_topology) {
      const sns::LoadedSubnet loaded = sns::topology_from_json(text);
      params = loaded.params;
      op = args.op ? sns::parse_op(*args.op) : loaded.topology.op;
      output = loaded.topology.output;
    } else {
      if (!args.op) throw sns::InvalidParameter("--op is required for params without a topology block");
      params = sns::params_from_json(text);
      op = sns::parse_op(*args.op);
      output = params.n - 1;
    }
  } catch (const sns::Error& e) {
    log << "error: " << e.what() << '\n';
    return kUsage;
  }
  if (!make_out_dir(dir, log)) return kUsage;

  int code = kOk;
  try {
    write_file(args.out, sns::contour_csv(params, op, output, args.grid));
    const double err = sns::contour_max_error(params, op, output, args.grid);
    log << "max error " << fmt(err) << " mV over a " << args.grid << "x" << args.grid << " grid\n";
    if (args.tolerance && !(err <= *args.tolerance)) code = kFailure;
  } catch (const sns::Error& e) {
    code = classify(e, log);
  }
  return finish(manifest, dir, code, log);
}

int cmd_echo(std::istream& in, std::ostream& out, double latency_ms) {
  if (!(latency_ms >= 0.0)) {
    out << "error: --latency-ms must be >= 0\n";
    return kUsage;
  }
  sns::LoopbackDevice device(sns::SimConfig{}, latency_ms / 1000.0);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    for (const std::string& reply : device.transact(line)) out << reply << '\n';
  }
  return kOk;
}

}  // namespace snsctl
