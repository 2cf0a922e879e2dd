#pragma once

#include <span>

#include "sns/bptt.hpp"

namespace sns {

struct AdamConfig {
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// Elementwise Adam with bias correction on flat arrays; `step` is the
/// 1-based update count.
void adam_update(std::span<double> params, std::span<const double> grads,
                 std::span<double> m, std::span<double> v, long step,
                 const AdamConfig& config);

struct AdamState {
  Gradients m;
  Gradients v;
  long t = 0;

  static AdamState zeros(int n);
};

/// One Adam update of W, V, tau and b, then projection: off-mask entries
/// reset to 0, W sign limits enforced, V and tau clipped at 0.
void adam_step(AdamState& state, NetworkParams& params, const Gradients& grads,
               const AdamConfig& config, const LearnMask& mask);

/// Projection used by adam_step.
void project(NetworkParams& params, const LearnMask& mask);

}  // namespace sns
