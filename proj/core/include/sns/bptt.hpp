#pragma once

#include <span>
#include <vector>

#include "sns/dataset.hpp"
#include "sns/network.hpp"

namespace sns {

/// Which parameters training may touch and how W entries are sign-limited.
struct LearnMask {
  Mask w;
  Mask v;
  std::vector<bool> tau;
  std::vector<bool> b;
  /// +1 keeps a W entry >= 0, -1 keeps it <= 0, 0 leaves it free.
  Eigen::Matrix<signed char, Eigen::Dynamic, Eigen::Dynamic> w_sign;

  /// W and V learnable on params.mask, tau and b on every non-clamped neuron,
  /// clamped rows frozen.
  static LearnMask from_params(const NetworkParams& params);
};

struct Gradients {
  Matrix W;
  Matrix V;
  Vector tau;
  Vector b;

  static Gradients zeros(int n);
  void apply(const LearnMask& mask);
  double max_abs() const;
  Gradients& operator+=(const Gradients& other);
};

struct LossSpec {
  int output = 0;
  int warmup = 0;
};

/// Value the network reports for an output potential: clamp(u, e_lo, e_hi),
/// i.e. the output activity expressed in mV.
double readout(double u, double e_lo, double e_hi);

/// Batch-mean MSE of the readout against the targets, computed with step()
/// from a zero initial state.
double batch_loss(const NetworkParams& params, std::span<const Sequence> batch,
                  const LossSpec& spec);

struct LossAndGrad {
  double loss = 0.0;
  Gradients grad;
};

/// Reverse-mode gradient of batch_loss through the unrolled update.
/// Throws NumericalFault if the forward pass produces a non-finite value.
LossAndGrad bptt_grad(const NetworkParams& params,
                      std::span<const Sequence> batch, const LossSpec& spec,
                      const LearnMask& mask);
LossAndGrad bptt_grad(const NetworkParams& params,
                      std::span<const Sequence> batch, const LossSpec& spec);
LossAndGrad bptt_grad(const NetworkParams& params,
                      std::span<const Sequence* const> batch,
                      const LossSpec& spec, const LearnMask& mask);

struct FiniteDiffResult {
  Gradients grad;
  /// 1 where the +eps / -eps runs landed on different sides of an
  /// activation or readout kink; those entries are not differentiable there.
  Gradients kink;
  int evaluated = 0;
  int kink_crossings = 0;
};

/// Central differences of batch_loss, parameter by parameter. tau entries
/// closer than eps to zero use a second-order one-sided stencil.
FiniteDiffResult finite_diff_grad(const NetworkParams& params,
                                  std::span<const Sequence> batch,
                                  const LossSpec& spec, const LearnMask& mask,
                                  double eps = 1e-5);

}  // namespace sns
