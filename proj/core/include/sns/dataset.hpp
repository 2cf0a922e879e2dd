#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sns/arith.hpp"
#include "sns/network.hpp"

namespace sns {

/// One training sequence: T rows of clamped-input potentials and the
/// T-long target series for the output neuron (both mV).
struct Sequence {
  Matrix inputs;  // T x |clamped|
  Vector target;  // T
};

struct Dataset {
  std::vector<Sequence> examples;
  int T = 0;
  double dt = 0.1;
  std::uint64_t seed = 0;
};

/// n sequences with two constant features drawn uniformly from [lo, hi] mV
/// and a constant label ideal_op(op, a, b).
Dataset gen_dataset(ArithOp op, int n, int T, double dt, std::uint64_t seed,
                    double lo = 0.0, double hi = 20.0);

/// Mean squared difference over steps warmup..T-1 (mV^2).
double mse_loss(std::span<const double> pred, std::span<const double> label,
                int warmup = 0);

}  // namespace sns
