#pragma once

// Subcommands of snsctl. Each returns a process exit code and writes its
// outputs plus a manifest.json under the requested directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace snsctl {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,    // bad flags, unreadable or invalid config
  kFailure = 2,  // numerical fault, divergence, or a failed criterion
};

struct RunManifest {
  std::string subcommand;
  std::string config;  // path, empty for built-in defaults
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string version;
  std::string started;  // ISO-8601 UTC
  std::string finished;
  int exit_code = 0;
};

/// git-describe string captured at configure time.
std::string version();
std::string utc_now();
void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

struct TrainArgs {
  std::string op;
  std::filesystem::path config;  // empty: built-in defaults
  std::filesystem::path out;
  bool mlp_baseline = false;
  std::optional<std::uint64_t> seed;  // overrides init_seed and shuffle seed
  int grid = 21;
};

struct GradcheckArgs {
  std::uint64_t seed = 0;
  int nets = 100;
  int neurons = 4;
  int steps = 10;
  bool corrupt = false;
  std::filesystem::path out;  // optional
};

struct PickPlaceArgs {
  std::filesystem::path config;
  std::filesystem::path out;
  bool via_protocol = false;
  double latency_ms = 0.0;  // > 0 implies via_protocol
  std::filesystem::path sub_params;  // trained subnets for the controller
  std::filesystem::path add_params;
};

struct ContourArgs {
  std::filesystem::path params;
  std::filesystem::path out;  // CSV file; manifest.json goes next to it
  std::optional<std::string> op;  // required when params lack a topology block
  int grid = 21;
  std::optional<double> tolerance;  // exit 2 when the max error exceeds it
};

/// Grid max-abs-error a trained subnet must reach (mV).
double grid_criterion(const std::string& op);

int cmd_train(const TrainArgs& args, std::ostream& log);
int cmd_gradcheck(const GradcheckArgs& args, std::ostream& log);
int cmd_pickplace(const PickPlaceArgs& args, std::ostream& log);
int cmd_contour(const ContourArgs& args, std::ostream& log);
/// Feeds each input line to a loopback device and prints its replies.
int cmd_echo(std::istream& in, std::ostream& out, double latency_ms);

}  // namespace snsctl
