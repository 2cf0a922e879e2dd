#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sns/arith.hpp"
#include "sns/bptt.hpp"
#include "sns/network.hpp"

namespace sns {

/// Wiring of one arithmetic subnetwork: which W/V entries are learnable,
/// their sign limits, and the initial parameters.
///
/// add/sub/div: neurons {input a, input b, output}.
/// mul:         neurons {input a, input b, interneuron, output}; input b
///              inhibits a tonically active interneuron (W < 0 plus a
///              shunting V), which shunts the output.
struct Topology {
  ArithOp op = ArithOp::Add;
  int n = 0;
  std::array<int, 2> inputs{0, 1};
  int output = 0;
  Mask w_mask;
  Mask v_mask;
  Eigen::Matrix<signed char, Eigen::Dynamic, Eigen::Dynamic> w_sign;
  NetworkParams init;
  std::uint64_t init_seed = 0;
  /// Steps excluded from the loss: the output cannot see the inputs before
  /// the signal has crossed every synaptic layer.
  int warmup = 0;

  LearnMask learn_mask() const;
  std::string name() const { return std::string(to_string(op)); }
};

/// Initial tau (s) of every non-clamped subnetwork neuron.
inline constexpr double kSubnetInitTau = 0.05;

Topology build_topology(ArithOp op, std::uint64_t seed, double dt = 0.1);
/// Throws InvalidParameter for an unknown op name.
Topology build_topology(std::string_view op_name, std::uint64_t seed,
                        double dt = 0.1);

/// The hand-set shunting division network: b = 0, tau = 0,
/// W(out, a) = 20, V(out, b) = 20, so U_out = U_a / (1 + U_b) on [0, 20] mV.
NetworkParams exact_division_params(double dt = 0.1);

/// Hand-set subtraction (W = +20, -20) and addition (W = +20, +20) nets.
NetworkParams exact_subtraction_params(double dt = 0.1);
NetworkParams exact_addition_params(double dt = 0.1);

/// A hand-tuned multiplier in the mul topology; approximates a b / 20 with
/// the error shrinking as `gain` grows.
NetworkParams hand_multiplier_params(double gain = 400.0, double dt = 0.1);

/// Steady-state output readout for constant inputs (a, b).
double steady_output(const NetworkParams& params, int output, double a,
                     double b, double tol = 1e-12, int max_iter = 100000);

/// grid_n x grid_n steady-state readouts over a uniform [0, 20]^2 grid;
/// entry (i, j) is at a = 20 i / (grid_n - 1), b = 20 j / (grid_n - 1).
/// Non-convergence is rethrown with the grid coordinates in the message.
Matrix eval_contour(const NetworkParams& params, int output, int grid_n);

/// The ideal surface on the same grid.
Matrix ideal_contour(ArithOp op, int grid_n);

/// Max |contour - ideal| over the grid.
double contour_max_error(const NetworkParams& params, ArithOp op, int output,
                         int grid_n);

/// CSV with header `a,b,sns,ideal`, one row per grid point.
std::string contour_csv(const NetworkParams& params, ArithOp op, int output,
                        int grid_n);

enum class SynapseKind { Excitatory, Inhibitory, Shunting, Silent };
std::string_view to_string(SynapseKind kind);

struct SynapseReport {
  int pre = 0;
  int post = 0;
  SynapseKind kind = SynapseKind::Silent;
};

/// Classifies every masked synapse by the sign of its W entry and the
/// presence of a V entry.
std::vector<SynapseReport> classify_synapses(const NetworkParams& params);

/// NetworkParams JSON plus a "topology" block.
std::string topology_to_json(const Topology& topo, const NetworkParams& params);

struct LoadedSubnet {
  Topology topology;
  NetworkParams params;
};
LoadedSubnet topology_from_json(const std::string& text);
LoadedSubnet load_subnet(const std::filesystem::path& path);

}  // namespace sns
