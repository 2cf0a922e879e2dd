#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sns/adam.hpp"
#include "sns/dataset.hpp"
#include "sns/subnet.hpp"

namespace sns {

struct TrainConfig {
  int epochs = 300;
  int batch_size = 32;
  AdamConfig adam;
  /// Override the topology's output neuron / warmup.
  std::optional<int> output;
  std::optional<int> warmup;
  /// Minibatch shuffling.
  std::uint64_t seed = 0;
  /// Stop once the epoch MSE falls below this (mV^2); 0 runs every epoch.
  double stop_mse = 0.0;

  // Dataset generation (used by callers that build the data from the config).
  int examples = 1000;
  int seq_len = 50;
  double dt = 0.1;
  std::uint64_t data_seed = 1;
  std::uint64_t init_seed = 1;

  void validate() const;
};

TrainConfig train_config_from_json(const std::string& text);
TrainConfig load_train_config(const std::filesystem::path& path);
std::string train_config_to_json(const TrainConfig& config);

struct LossCurve {
  std::vector<double> mse;      // full-dataset MSE after each epoch (mV^2)
  std::vector<double> seconds;  // wall-clock of each epoch

  std::size_t size() const { return mse.size(); }
  double final_mse() const;
  double best_mse() const;
  /// First epoch (1-based) whose MSE is below `threshold`, or -1.
  int epochs_to(double threshold) const;
};

/// `epoch,mse,seconds` with one row per epoch.
std::string loss_curve_csv(const LossCurve& curve);

struct TrainResult {
  NetworkParams params;  // lowest full-dataset MSE seen
  LossCurve curve;
  int best_epoch = 0;    // 0 = the initial parameters were best
};

/// Minibatch BPTT + Adam from `init`. After each epoch the whole dataset is
/// scored; that score forms the curve and selects the returned parameters.
/// Throws TrainingDiverged if the loss becomes non-finite.
TrainResult train(const NetworkParams& init, const LearnMask& mask,
                  const LossSpec& spec, const Dataset& data,
                  const TrainConfig& config);

/// Convenience overload using the topology's initial params, mask, output
/// and warmup (the latter two overridable by `config`).
TrainResult train(const Topology& topology, const Dataset& data,
                  const TrainConfig& config);

LossSpec loss_spec(const Topology& topology, const TrainConfig& config);

}  // namespace sns
