#pragma once

#include <cstdint>
#include <vector>

#include "sns/arith.hpp"
#include "sns/dataset.hpp"
#include "sns/train.hpp"

namespace sns {

/// Feedforward baseline on the same activation as the SNS. Inputs enter as
/// activities phi(a), phi(b); every layer computes u = W x + b in mV; hidden
/// layers pass phi(u) on, the last layer reports clamp(u, e_lo, e_hi).
struct MlpParams {
  std::vector<int> sizes;  // e.g. {2, 1} or {2, 2, 1}
  std::vector<Matrix> W;   // W[l] is sizes[l+1] x sizes[l]
  std::vector<Vector> b;
  double e_lo = 0.0;
  double e_hi = 20.0;

  static MlpParams zeros(std::vector<int> sizes, double e_lo = 0.0,
                         double e_hi = 20.0);
  void validate() const;
  int parameter_count() const;
};

/// Baseline shapes: 2 -> 1 for add/sub/div, 2 -> 2 -> 1 for mul. Output
/// weights start excitatory, hidden weights with either sign.
MlpParams mlp_baseline(ArithOp op, std::uint64_t seed);

double mlp_eval(const MlpParams& params, double a, double b);

struct MlpTrainResult {
  MlpParams params;  // lowest full-dataset MSE seen
  LossCurve curve;
  int best_epoch = 0;
};

/// Per-step MSE of the MLP applied to each input row, averaged over the
/// batch; steps before `warmup` are skipped.
double mlp_loss(const MlpParams& params, std::span<const Sequence> data,
                int warmup = 0);

/// Same minibatch/Adam/epoch protocol as train(); uses config.warmup or 0.
MlpTrainResult mlp_train(const MlpParams& init, const Dataset& data,
                         const TrainConfig& config);

std::string mlp_to_json(const MlpParams& params);
MlpParams mlp_from_json(const std::string& text);

}  // namespace sns
