#include "sns/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sns/error.hpp"

namespace sns {

NetworkParams NetworkParams::zeros(int n, double dt, double e_lo,
                                   double e_hi) {
  NetworkParams p;
  p.n = n;
  p.W = Matrix::Zero(n, n);
  p.V = Matrix::Zero(n, n);
  p.tau = Vector::Zero(n);
  p.b = Vector::Zero(n);
  p.dt = dt;
  p.e_lo = e_lo;
  p.e_hi = e_hi;
  p.mask = Mask::Constant(n, n, false);
  return p;
}

void NetworkParams::validate() const {
  auto fail = [](const std::string& msg) {
    throw InvalidParameter("NetworkParams: " + msg);
  };
  if (n < 0) fail("negative neuron count");
  if (W.rows() != n || W.cols() != n) fail("W must be n x n");
  if (V.rows() != n || V.cols() != n) fail("V must be n x n");
  if (mask.rows() != n || mask.cols() != n) fail("mask must be n x n");
  if (tau.size() != n || b.size() != n) fail("tau and b must have length n");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
  if (!(e_lo < e_hi)) fail("e_lo must be below e_hi");
  if (!W.allFinite() || !V.allFinite() || !tau.allFinite() || !b.allFinite()) {
    fail("parameters must be finite");
  }
  if ((V.array() < 0.0).any()) fail("V entries must be nonnegative");
  if ((tau.array() < 0.0).any()) fail("tau entries must be nonnegative");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!mask(i, j) && (W(i, j) != 0.0 || V(i, j) != 0.0)) {
        fail("W/V entry (" + std::to_string(i) + "," + std::to_string(j) +
             ") is nonzero outside the mask");
      }
    }
  }
  std::vector<int> seen;
  for (int c : clamped) {
    if (c < 0 || c >= n) fail("clamped index out of range");
    if (std::find(seen.begin(), seen.end(), c) != seen.end()) {
      fail("duplicate clamped index");
    }
    seen.push_back(c);
  }
}

bool NetworkParams::is_clamped(int i) const { return clamp_slot(i) >= 0; }

int NetworkParams::clamp_slot(int i) const {
  auto it = std::find(clamped.begin(), clamped.end(), i);
  return it == clamped.end() ? -1 : static_cast<int>(it - clamped.begin());
}

void NetworkParams::apply_mask() {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!mask(i, j)) {
        W(i, j) = 0.0;
        V(i, j) = 0.0;
      }
    }
  }
}

Vector NetworkParams::activity(const Vector& h) const {
  Vector out(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    out[i] = activation(h[i], e_lo, e_hi);
  }
  return out;
}

NetworkParams from_biophysical(std::span<const BiophysicalNeuron> neurons,
                               double dt, double e_lo, double e_hi) {
  const int n = static_cast<int>(neurons.size());
  NetworkParams p = NetworkParams::zeros(n, dt, e_lo, e_hi);
  for (int i = 0; i < n; ++i) {
    const auto& nr = neurons[i];
    if (!(nr.c_m > 0.0) || !(nr.g_m > 0.0)) {
      throw InvalidParameter("from_biophysical: c_m and g_m must be positive");
    }
    p.tau[i] = nr.c_m / nr.g_m * 1e-3;
    p.b[i] = nr.e_r + nr.i_bias / nr.g_m;
    for (const auto& s : nr.synapses) {
      if (s.pre < 0 || s.pre >= n) {
        throw InvalidParameter("from_biophysical: presynaptic index out of range");
      }
      if (!(s.g >= 0.0)) {
        throw InvalidParameter("from_biophysical: synaptic conductance must be >= 0");
      }
      p.W(i, s.pre) += s.g * s.e_rev / nr.g_m;
      p.V(i, s.pre) += s.g / nr.g_m;
      p.mask(i, s.pre) = true;
    }
  }
  p.validate();
  return p;
}

namespace {

Vector clamped_prev(const NetworkParams& params, const NeuronState& state,
                    std::span<const double> inputs) {
  if (state.h.size() != params.n) {
    throw InvalidParameter("step: state size does not match network");
  }
  if (inputs.size() != params.clamped.size()) {
    throw InvalidParameter("step: expected one input per clamped neuron");
  }
  Vector prev = state.h;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    prev[params.clamped[k]] = inputs[k];
  }
  return prev;
}

NeuronState finish(const NetworkParams& params, const NeuronState& state,
                   Vector next, std::span<const double> inputs) {
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    next[params.clamped[k]] = inputs[k];
  }
  for (int i = 0; i < params.n; ++i) {
    if (!std::isfinite(next[i])) {
      throw NumericalFault("step: non-finite potential at neuron " +
                               std::to_string(i),
                           i, state.t + 1);
    }
  }
  return {std::move(next), state.t + 1};
}

}  // namespace

NeuronState step(const NetworkParams& params, const NeuronState& state,
                 std::span<const double> inputs) {
  const Vector prev = clamped_prev(params, state, inputs);
  const Vector phi = params.activity(prev);
  const Vector denom = Vector::Ones(params.n) + params.V * phi;
  const Vector drive = params.b + params.W * phi;
  Vector next(params.n);
  for (int i = 0; i < params.n; ++i) {
    const double tau_hat = params.tau[i] / denom[i];
    const double z = params.dt / (tau_hat + params.dt);
    if (!(z > 0.0 && z <= 1.0)) {
      throw NumericalFault("step: update gate outside (0, 1] at neuron " +
                               std::to_string(i),
                           i, state.t + 1);
    }
    const double h_hat = drive[i] / denom[i];
    next[i] = (1.0 - z) * prev[i] + z * h_hat;
  }
  return finish(params, state, std::move(next), inputs);
}

NeuronState step(const NetworkParams& params, const NeuronState& state,
                 const std::map<int, double>& inputs) {
  std::vector<double> dense(params.clamped.size());
  for (std::size_t k = 0; k < params.clamped.size(); ++k) {
    dense[k] = state.h[params.clamped[k]];
  }
  for (const auto& [index, value] : inputs) {
    const int slot = params.clamp_slot(index);
    if (slot < 0) {
      throw InvalidParameter("step: input for neuron " + std::to_string(index) +
                             " which is not clamped");
    }
    dense[slot] = value;
  }
  return step(params, state, dense);
}

NeuronState ctrnn_step(const NetworkParams& params, const NeuronState& state,
                       std::span<const double> inputs) {
  const Vector prev = clamped_prev(params, state, inputs);
  const Vector h_hat = params.b + params.W * params.activity(prev);
  Vector next(params.n);
  for (int i = 0; i < params.n; ++i) {
    const double total = params.tau[i] + params.dt;
    next[i] = params.tau[i] / total * prev[i] + params.dt / total * h_hat[i];
  }
  return finish(params, state, std::move(next), inputs);
}

NeuronState vanilla_step(const NetworkParams& params, const NeuronState& state,
                         std::span<const double> inputs) {
  const Vector prev = clamped_prev(params, state, inputs);
  Vector next = params.b + params.W * params.activity(prev);
  return finish(params, state, std::move(next), inputs);
}

NeuronState advance(Dynamics kind, const NetworkParams& params,
                    const NeuronState& state, std::span<const double> inputs) {
  switch (kind) {
    case Dynamics::Ctrnn:
      return ctrnn_step(params, state, inputs);
    case Dynamics::Vanilla:
      return vanilla_step(params, state, inputs);
    case Dynamics::Sns:
      break;
  }
  return step(params, state, inputs);
}

Matrix simulate(const NetworkParams& params, const Matrix& input_series,
                const Vector& h0, Dynamics kind) {
  const auto T = input_series.rows();
  if (T < 1) throw InvalidParameter("simulate: need at least one time step");
  if (input_series.cols() != static_cast<Eigen::Index>(params.clamped.size())) {
    throw InvalidParameter("simulate: input columns must match clamped set");
  }
  Matrix traj(T, params.n);
  NeuronState state{h0, 0};
  std::vector<double> row(params.clamped.size());
  for (Eigen::Index t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      row[k] = input_series(t, static_cast<Eigen::Index>(k));
    }
    state = advance(kind, params, state, row);
    traj.row(t) = state.h.transpose();
  }
  return traj;
}

SteadyState steady_state(const NetworkParams& params,
                         std::span<const double> inputs, double tol,
                         int max_iter, std::optional<Vector> h0) {
  if (!(tol > 0.0)) throw InvalidParameter("steady_state: tol must be > 0");
  NeuronState state{h0 ? *h0 : Vector::Zero(params.n), 0};
  double residual = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    NeuronState next = step(params, state, inputs);
    residual = params.n ? (next.h - state.h).cwiseAbs().maxCoeff() : 0.0;
    state = std::move(next);
    if (residual < tol) return {std::move(state), it, residual};
  }
  throw NonConvergence("steady_state: no convergence after " +
                           std::to_string(max_iter) + " iterations",
                       residual);
}

}  // namespace sns
