#pragma once

#include <cstdint>
#include <string>

#include "sns/bptt.hpp"

namespace sns {

struct GradCheckSpec {
  std::uint64_t seed = 0;
  int nets = 1;         // random networks per run
  int n = 4;            // neurons; n >= 3 clamps neurons 0 and 1 as inputs
  int T = 10;           // sequence length
  int batch = 4;        // sequences per network
  double eps = 1e-5;    // finite-difference step
  /// Relative error is |a - b| / max(|a|, |b|, floor).
  double floor = 1e-3;
  /// Test hook: perturb one analytic gradient entry by 1%.
  bool corrupt = false;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  int evaluated = 0;
  int skipped = 0;  // entries whose perturbation crossed an activation kink
  std::string worst;  // which entry produced max_rel_error

  double skip_fraction() const {
    return evaluated ? static_cast<double>(skipped) / evaluated : 0.0;
  }
};

/// Random network for gradient checks: every non-clamped row fully
/// connected, W ~ U(-10, 20), V ~ U(0, 5), tau ~ U(0.01, 0.2) s,
/// b ~ U(0, 10) mV, output = last neuron.
NetworkParams random_check_network(int n, std::uint64_t seed);

/// Random inputs and targets in [0, 20] mV.
std::vector<Sequence> random_check_batch(const NetworkParams& params, int batch,
                                         int T, std::uint64_t seed);

/// bptt_grad against finite_diff_grad on `spec.nets` random networks.
GradCheckReport gradient_check(const GradCheckSpec& spec);

}  // namespace sns
