#include "sns/adam.hpp"

#include <algorithm>
#include <cmath>

#include "sns/error.hpp"

namespace sns {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidParameter("adam: learning rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw InvalidParameter("adam: betas must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw InvalidParameter("adam: epsilon must be > 0");
}

void adam_update(std::span<double> params, std::span<const double> grads,
                 std::span<double> m, std::span<double> v, long step,
                 const AdamConfig& config) {
  if (grads.size() != params.size() || m.size() != params.size() ||
      v.size() != params.size()) {
    throw InvalidParameter("adam_update: shape mismatch");
  }
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

AdamState AdamState::zeros(int n) {
  return {Gradients::zeros(n), Gradients::zeros(n), 0};
}

namespace {

void update_entry(double& p, double g, double& m, double& v, double bias1,
                  double bias2, const AdamConfig& c) {
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v + (1.0 - c.beta2) * g * g;
  p -= c.learning_rate * (m / bias1) / (std::sqrt(v / bias2) + c.epsilon);
}

}  // namespace

void adam_step(AdamState& state, NetworkParams& params, const Gradients& grads,
               const AdamConfig& config, const LearnMask& mask) {
  const int n = params.n;
  if (grads.W.rows() != n || state.m.W.rows() != n) {
    throw InvalidParameter("adam_step: shape mismatch");
  }
  ++state.t;
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (mask.w(i, j)) {
        update_entry(params.W(i, j), grads.W(i, j), state.m.W(i, j),
                     state.v.W(i, j), bias1, bias2, config);
      }
      if (mask.v(i, j)) {
        update_entry(params.V(i, j), grads.V(i, j), state.m.V(i, j),
                     state.v.V(i, j), bias1, bias2, config);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (mask.tau[static_cast<std::size_t>(i)]) {
      update_entry(params.tau[i], grads.tau[i], state.m.tau[i], state.v.tau[i],
                   bias1, bias2, config);
    }
    if (mask.b[static_cast<std::size_t>(i)]) {
      update_entry(params.b[i], grads.b[i], state.m.b[i], state.v.b[i], bias1,
                   bias2, config);
    }
  }
  project(params, mask);
}

void project(NetworkParams& params, const LearnMask& mask) {
  params.apply_mask();
  for (int i = 0; i < params.n; ++i) {
    for (int j = 0; j < params.n; ++j) {
      const signed char s = mask.w_sign.size() ? mask.w_sign(i, j) : 0;
      if (s > 0) params.W(i, j) = std::max(params.W(i, j), 0.0);
      if (s < 0) params.W(i, j) = std::min(params.W(i, j), 0.0);
      params.V(i, j) = std::max(params.V(i, j), 0.0);
    }
    params.tau[i] = std::max(params.tau[i], 0.0);
  }
}

}  // namespace sns
