#include "sns/bptt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sns/error.hpp"

namespace sns {

LearnMask LearnMask::from_params(const NetworkParams& params) {
  const int n = params.n;
  LearnMask m;
  m.w = params.mask;
  m.v = params.mask;
  m.tau.assign(static_cast<std::size_t>(n), true);
  m.b.assign(static_cast<std::size_t>(n), true);
  m.w_sign.setZero(n, n);
  for (int c : params.clamped) {
    m.w.row(c).setConstant(false);
    m.v.row(c).setConstant(false);
    m.tau[static_cast<std::size_t>(c)] = false;
    m.b[static_cast<std::size_t>(c)] = false;
  }
  return m;
}

Gradients Gradients::zeros(int n) {
  return {Matrix::Zero(n, n), Matrix::Zero(n, n), Vector::Zero(n),
          Vector::Zero(n)};
}

void Gradients::apply(const LearnMask& mask) {
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      if (!mask.w(i, j)) W(i, j) = 0.0;
      if (!mask.v(i, j)) V(i, j) = 0.0;
    }
    if (!mask.tau[static_cast<std::size_t>(i)]) tau[i] = 0.0;
    if (!mask.b[static_cast<std::size_t>(i)]) b[i] = 0.0;
  }
}

double Gradients::max_abs() const {
  double m = 0.0;
  if (W.size()) m = std::max(m, W.cwiseAbs().maxCoeff());
  if (V.size()) m = std::max(m, V.cwiseAbs().maxCoeff());
  if (tau.size()) m = std::max(m, tau.cwiseAbs().maxCoeff());
  if (b.size()) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  W += other.W;
  V += other.V;
  tau += other.tau;
  b += other.b;
  return *this;
}

double readout(double u, double e_lo, double e_hi) {
  return std::clamp(u, e_lo, e_hi);
}

namespace {

void check_spec(const NetworkParams& params, const LossSpec& spec, int T) {
  if (spec.output < 0 || spec.output >= params.n) {
    throw InvalidParameter("loss: output neuron out of range");
  }
  if (spec.warmup < 0 || spec.warmup >= T) {
    throw InvalidParameter("loss: warmup must be in [0, T)");
  }
}

signed char region(double u, double lo, double hi) {
  if (u < lo) return -1;
  if (u > hi) return 1;
  if (u == lo) return -2;
  if (u == hi) return 2;
  return 0;
}

// Forward pass through step(); optionally records which linear piece of
// phi (and of the readout) every evaluation landed on.
double forward_loss(const NetworkParams& params, std::span<const Sequence> batch,
                    const LossSpec& spec, std::vector<signed char>* signature) {
  if (batch.empty()) throw InvalidParameter("loss: empty batch");
  double total = 0.0;
  std::vector<double> row(params.clamped.size());
  for (const Sequence& seq : batch) {
    const int T = static_cast<int>(seq.target.size());
    check_spec(params, spec, T);
    NeuronState state = NeuronState::zeros(params.n);
    double sum = 0.0;
    for (int t = 0; t < T; ++t) {
      for (std::size_t k = 0; k < row.size(); ++k) {
        row[k] = seq.inputs(t, static_cast<Eigen::Index>(k));
      }
      if (signature) {
        Vector prev = state.h;
        for (std::size_t k = 0; k < row.size(); ++k) prev[params.clamped[k]] = row[k];
        for (int j = 0; j < params.n; ++j) {
          signature->push_back(region(prev[j], params.e_lo, params.e_hi));
        }
      }
      state = step(params, state, row);
      const double u = state.h[spec.output];
      if (signature) signature->push_back(region(u, params.e_lo, params.e_hi));
      if (t >= spec.warmup) {
        const double d = readout(u, params.e_lo, params.e_hi) - seq.target[t];
        sum += d * d;
      }
    }
    total += sum / (T - spec.warmup);
  }
  return total / static_cast<double>(batch.size());
}

// Per-sequence tape, row-major [step * n + neuron].
struct Tape {
  std::vector<double> prev, phi, slope, denom_total, next;
  std::vector<double> pred;

  void resize(int T, int n) {
    const auto sz = static_cast<std::size_t>(T) * static_cast<std::size_t>(n);
    prev.resize(sz);
    phi.resize(sz);
    slope.resize(sz);
    denom_total.resize(sz);
    next.resize(sz);
    pred.resize(static_cast<std::size_t>(T));
  }
};

}  // namespace

double batch_loss(const NetworkParams& params, std::span<const Sequence> batch,
                  const LossSpec& spec) {
  return forward_loss(params, batch, spec, nullptr);
}

LossAndGrad bptt_grad(const NetworkParams& params,
                      std::span<const Sequence* const> batch,
                      const LossSpec& spec, const LearnMask& mask) {
  if (batch.empty()) throw InvalidParameter("bptt_grad: empty batch");
  const int n = params.n;
  const double dt = params.dt;
  const double lo = params.e_lo;
  const double hi = params.e_hi;
  const double span_inv = 1.0 / (hi - lo);
  std::vector<char> is_clamped(static_cast<std::size_t>(n), 0);
  for (int c : params.clamped) is_clamped[static_cast<std::size_t>(c)] = 1;

  LossAndGrad out{0.0, Gradients::zeros(n)};
  Gradients& g = out.grad;
  Tape tape;
  std::vector<double> h(static_cast<std::size_t>(n));
  std::vector<double> delta(static_cast<std::size_t>(n));
  std::vector<double> carry(static_cast<std::size_t>(n));
  std::vector<double> a_coef(static_cast<std::size_t>(n));
  std::vector<double> e_coef(static_cast<std::size_t>(n));
  const double batch_inv = 1.0 / static_cast<double>(batch.size());

  for (const Sequence* seq_ptr : batch) {
    const Sequence& seq = *seq_ptr;
    const int T = static_cast<int>(seq.target.size());
    check_spec(params, spec, T);
    if (seq.inputs.rows() != T ||
        seq.inputs.cols() != static_cast<Eigen::Index>(params.clamped.size())) {
      throw InvalidParameter("bptt_grad: sequence shape does not match network");
    }
    tape.resize(T, n);
    std::fill(h.begin(), h.end(), 0.0);

    // Forward, mirroring step(): tau_hat, z, h_hat, convex update.
    double seq_loss = 0.0;
    for (int t = 0; t < T; ++t) {
      double* prev = &tape.prev[static_cast<std::size_t>(t) * n];
      double* phi = &tape.phi[static_cast<std::size_t>(t) * n];
      double* slope = &tape.slope[static_cast<std::size_t>(t) * n];
      double* mt = &tape.denom_total[static_cast<std::size_t>(t) * n];
      double* next = &tape.next[static_cast<std::size_t>(t) * n];
      for (int j = 0; j < n; ++j) prev[j] = h[static_cast<std::size_t>(j)];
      for (std::size_t k = 0; k < params.clamped.size(); ++k) {
        prev[params.clamped[k]] = seq.inputs(t, static_cast<Eigen::Index>(k));
      }
      for (int j = 0; j < n; ++j) {
        phi[j] = (std::clamp(prev[j], lo, hi) - lo) * span_inv;
        slope[j] = (prev[j] > lo && prev[j] < hi) ? span_inv : 0.0;
      }
      for (int i = 0; i < n; ++i) {
        double shunt = 0.0;
        double drive = 0.0;
        for (int j = 0; j < n; ++j) {
          shunt += params.V(i, j) * phi[j];
          drive += params.W(i, j) * phi[j];
        }
        const double denom = 1.0 + shunt;
        const double tau_hat = params.tau[i] / denom;
        const double z = dt / (tau_hat + dt);
        const double h_hat = (params.b[i] + drive) / denom;
        next[i] = (1.0 - z) * prev[i] + z * h_hat;
        mt[i] = params.tau[i] + dt * denom;
      }
      for (std::size_t k = 0; k < params.clamped.size(); ++k) {
        next[params.clamped[k]] = seq.inputs(t, static_cast<Eigen::Index>(k));
      }
      for (int i = 0; i < n; ++i) {
        if (!std::isfinite(next[i])) {
          throw NumericalFault("bptt_grad: non-finite potential at neuron " +
                                   std::to_string(i),
                               i, t + 1);
        }
        h[static_cast<std::size_t>(i)] = next[i];
      }
      const double r = readout(next[spec.output], lo, hi);
      tape.pred[static_cast<std::size_t>(t)] = r;
      if (t >= spec.warmup) {
        const double d = r - seq.target[t];
        seq_loss += d * d;
      }
    }
    const double window = static_cast<double>(T - spec.warmup);
    out.loss += seq_loss / window * batch_inv;

    // Backward. delta holds dL/dh after step t.
    const double loss_scale = 2.0 * batch_inv / window;
    std::fill(delta.begin(), delta.end(), 0.0);
    for (int t = T - 1; t >= 0; --t) {
      const double* prev = &tape.prev[static_cast<std::size_t>(t) * n];
      const double* phi = &tape.phi[static_cast<std::size_t>(t) * n];
      const double* slope = &tape.slope[static_cast<std::size_t>(t) * n];
      const double* mt = &tape.denom_total[static_cast<std::size_t>(t) * n];
      const double* next = &tape.next[static_cast<std::size_t>(t) * n];
      if (t >= spec.warmup) {
        const double u = next[spec.output];
        if (u > lo && u < hi) {
          delta[static_cast<std::size_t>(spec.output)] +=
              loss_scale * (tape.pred[static_cast<std::size_t>(t)] - seq.target[t]);
        }
      }
      for (int i = 0; i < n; ++i) {
        const auto si = static_cast<std::size_t>(i);
        if (is_clamped[si]) {
          a_coef[si] = 0.0;
          e_coef[si] = 0.0;
          carry[si] = 0.0;
          continue;
        }
        const double c = delta[si] / mt[i];
        g.b[i] += dt * c;
        g.tau[i] += (prev[i] - next[i]) * c;
        a_coef[si] = dt * c;
        e_coef[si] = dt * c * next[i];
        carry[si] = delta[si] * params.tau[i] / mt[i];
      }
      for (int j = 0; j < n; ++j) {
        double through = 0.0;
        for (int i = 0; i < n; ++i) {
          const auto si = static_cast<std::size_t>(i);
          if (a_coef[si] == 0.0 && e_coef[si] == 0.0) continue;
          g.W(i, j) += a_coef[si] * phi[j];
          g.V(i, j) -= e_coef[si] * phi[j];
          through += a_coef[si] * params.W(i, j) - e_coef[si] * params.V(i, j);
        }
        const auto sj = static_cast<std::size_t>(j);
        if (!is_clamped[sj]) carry[sj] += slope[j] * through;
      }
      std::copy(carry.begin(), carry.end(), delta.begin());
    }
  }
  g.apply(mask);
  return out;
}

LossAndGrad bptt_grad(const NetworkParams& params,
                      std::span<const Sequence> batch, const LossSpec& spec,
                      const LearnMask& mask) {
  std::vector<const Sequence*> ptrs;
  ptrs.reserve(batch.size());
  for (const Sequence& s : batch) ptrs.push_back(&s);
  return bptt_grad(params, std::span<const Sequence* const>(ptrs), spec, mask);
}

LossAndGrad bptt_grad(const NetworkParams& params,
                      std::span<const Sequence> batch, const LossSpec& spec) {
  return bptt_grad(params, batch, spec, LearnMask::from_params(params));
}

FiniteDiffResult finite_diff_grad(const NetworkParams& params,
                                  std::span<const Sequence> batch,
                                  const LossSpec& spec, const LearnMask& mask,
                                  double eps) {
  if (!(eps > 0.0)) throw InvalidParameter("finite_diff_grad: eps must be > 0");
  const int n = params.n;
  FiniteDiffResult res{Gradients::zeros(n), Gradients::zeros(n), 0, 0};
  NetworkParams work = params;

  // Perturbs one scalar through `slot`, returning (derivative, kink flag).
  auto probe = [&](double& slot, bool one_sided) {
    const double base = slot;
    std::vector<signed char> sig_a;
    std::vector<signed char> sig_b;
    double deriv = 0.0;
    if (one_sided) {
      const double f0 = forward_loss(work, batch, spec, &sig_a);
      slot = base + eps;
      const double f1 = forward_loss(work, batch, spec, nullptr);
      slot = base + 2.0 * eps;
      const double f2 = forward_loss(work, batch, spec, &sig_b);
      deriv = (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * eps);
    } else {
      slot = base + eps;
      const double fp = forward_loss(work, batch, spec, &sig_a);
      slot = base - eps;
      const double fm = forward_loss(work, batch, spec, &sig_b);
      deriv = (fp - fm) / (2.0 * eps);
    }
    slot = base;
    ++res.evaluated;
    const bool kink = sig_a != sig_b;
    if (kink) ++res.kink_crossings;
    return std::pair{deriv, kink};
  };

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (mask.w(i, j)) {
        auto [d, k] = probe(work.W(i, j), false);
        res.grad.W(i, j) = d;
        res.kink.W(i, j) = k ? 1.0 : 0.0;
      }
      if (mask.v(i, j)) {
        auto [d, k] = probe(work.V(i, j), false);
        res.grad.V(i, j) = d;
        res.kink.V(i, j) = k ? 1.0 : 0.0;
      }
    }
    if (mask.tau[static_cast<std::size_t>(i)]) {
      auto [d, k] = probe(work.tau[i], work.tau[i] < eps);
      res.grad.tau[i] = d;
      res.kink.tau[i] = k ? 1.0 : 0.0;
    }
    if (mask.b[static_cast<std::size_t>(i)]) {
      auto [d, k] = probe(work.b[i], false);
      res.grad.b[i] = d;
      res.kink.b[i] = k ? 1.0 : 0.0;
    }
  }
  return res;
}

}  // namespace sns
