#pragma once

// Discretized synthetic-nervous-system (SNS) dynamics.
//
// A network of n non-spiking neurons with membrane potentials h (mV) is
// advanced by one semi-implicit Euler step:
//
//   tau_hat = tau / (1 + V phi(h))
//   z       = dt / (tau_hat + dt)
//   h_hat   = (b + W phi(h)) / (1 + V phi(h))
//   h'      = (1 - z) h + z h_hat
//
// where phi is the piecewise-linear activation clamped to [e_lo, e_hi].
// V = 0 gives the CTRNN form, V = 0 and tau = 0 the vanilla RNN form.

#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sns {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Piecewise-linear activation: (clamp(u, e_lo, e_hi) - e_lo) / (e_hi - e_lo).
/// Throws InvalidParameter unless e_lo < e_hi.
double activation(double u, double e_lo, double e_hi);

/// Derivative of activation(). Zero outside the open interval (e_lo, e_hi),
/// including at the two kinks.
double activation_slope(double u, double e_lo, double e_hi);

/// Reduced parameter set of a discretized SNS.
struct NetworkParams {
  int n = 0;
  Matrix W;    // n x n, w_ij = g_ij E_ij / g_m,i
  Matrix V;    // n x n, v_ij = g_ij / g_m,i, nonnegative
  Vector tau;  // seconds, nonnegative
  Vector b;    // mV
  double dt = 0.1;
  double e_lo = 0.0;
  double e_hi = 20.0;
  Mask mask;                 // where synapses exist; W and V are zero elsewhere
  std::vector<int> clamped;  // input neurons, in input-column order

  /// All-zero network with an all-false mask and no clamped neurons.
  static NetworkParams zeros(int n, double dt = 0.1, double e_lo = 0.0,
                             double e_hi = 20.0);

  /// Checks shapes and invariants; throws InvalidParameter on violation.
  void validate() const;

  bool is_clamped(int i) const;
  /// Position of neuron i in `clamped`, or -1.
  int clamp_slot(int i) const;

  /// Zeroes every W/V entry outside the mask.
  void apply_mask();

  /// Activity of every neuron for potentials h.
  Vector activity(const Vector& h) const;
};

struct BiophysicalSynapse {
  int pre = 0;
  double g = 0.0;      // maximal conductance, uS
  double e_rev = 0.0;  // reversal potential, mV
};

struct BiophysicalNeuron {
  double c_m = 1.0;     // nF
  double g_m = 1.0;     // uS
  double e_r = 0.0;     // mV
  double i_bias = 0.0;  // nA
  std::vector<BiophysicalSynapse> synapses;
};

/// Reduces conductance-based neurons to NetworkParams. tau comes out in
/// seconds (nF / uS = ms). The resting potential is folded into the bias,
/// b_i = E_r,i + I_i / g_m,i.
NetworkParams from_biophysical(std::span<const BiophysicalNeuron> neurons,
                               double dt, double e_lo, double e_hi);

struct NeuronState {
  Vector h;
  long t = 0;

  static NeuronState zeros(int n) { return {Vector::Zero(n), 0}; }
};

enum class Dynamics { Sns, Ctrnn, Vanilla };

/// One update. `inputs[k]` is the potential of neuron `params.clamped[k]`;
/// its size must equal clamped.size(). Clamped potentials overwrite the
/// previous state before phi is evaluated and again after the update.
NeuronState step(const NetworkParams& params, const NeuronState& state,
                 std::span<const double> inputs);

/// Same, with a sparse index -> mV map. Keys must be clamped neurons;
/// clamped neurons missing from the map keep their current potential.
NeuronState step(const NetworkParams& params, const NeuronState& state,
                 const std::map<int, double>& inputs);

NeuronState ctrnn_step(const NetworkParams& params, const NeuronState& state,
                       std::span<const double> inputs);
NeuronState vanilla_step(const NetworkParams& params, const NeuronState& state,
                         std::span<const double> inputs);

NeuronState advance(Dynamics kind, const NetworkParams& params,
                    const NeuronState& state, std::span<const double> inputs);

/// Runs T steps. Row t of `input_series` (T x |clamped|) drives step t+1;
/// row t of the result is the state after t+1 steps.
Matrix simulate(const NetworkParams& params, const Matrix& input_series,
                const Vector& h0, Dynamics kind = Dynamics::Sns);

struct SteadyState {
  NeuronState state;
  int iterations = 0;
  double residual = 0.0;
};

/// Iterates step() under constant inputs until max|h_t - h_{t-1}| < tol.
/// Throws NonConvergence carrying the last residual after max_iter steps.
SteadyState steady_state(const NetworkParams& params,
                         std::span<const double> inputs, double tol = 1e-10,
                         int max_iter = 100000,
                         std::optional<Vector> h0 = std::nullopt);

}  // namespace sns
