#include "sns/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sns/error.hpp"

namespace sns {

NetworkParams random_check_network(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidParameter("random_check_network: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w(-10.0, 20.0), v(0.0, 5.0), tau(0.01, 0.2),
      bias(0.0, 10.0);
  NetworkParams p = NetworkParams::zeros(n);
  if (n >= 3) p.clamped = {0, 1};
  for (int i = 0; i < n; ++i) {
    if (p.is_clamped(i)) continue;
    for (int j = 0; j < n; ++j) {
      p.mask(i, j) = true;
      p.W(i, j) = w(rng);
      p.V(i, j) = v(rng);
    }
    p.tau[i] = tau(rng);
    p.b[i] = bias(rng);
  }
  return p;
}

std::vector<Sequence> random_check_batch(const NetworkParams& params, int batch, int T,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mv(0.0, 20.0);
  std::vector<Sequence> out(static_cast<std::size_t>(batch));
  for (Sequence& s : out) {
    s.inputs.resize(T, static_cast<Eigen::Index>(params.clamped.size()));
    for (Eigen::Index t = 0; t < s.inputs.rows(); ++t) {
      for (Eigen::Index k = 0; k < s.inputs.cols(); ++k) s.inputs(t, k) = mv(rng);
    }
    s.target.resize(T);
    for (int t = 0; t < T; ++t) s.target[t] = mv(rng);
  }
  return out;
}

GradCheckReport gradient_check(const GradCheckSpec& spec) {
  if (spec.nets < 1 || spec.n < 1 || spec.T < 1 || spec.batch < 1) {
    throw InvalidParameter("gradient_check: nets, n, T and batch must be >= 1");
  }
  if (!(spec.floor > 0.0)) throw InvalidParameter("gradient_check: floor must be > 0");
  GradCheckReport report;
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(2 * spec.nets));
  std::mt19937_64 mix(spec.seed);
  for (auto& s : seeds) s = mix();
  for (int k = 0; k < spec.nets; ++k) {
    const NetworkParams p = random_check_network(spec.n, seeds[2 * k]);
    const std::vector<Sequence> batch =
        random_check_batch(p, spec.batch, spec.T, seeds[2 * k + 1]);
    const LossSpec loss{spec.n - 1, 0};
    const LearnMask mask = LearnMask::from_params(p);
    LossAndGrad analytic = bptt_grad(p, batch, loss, mask);
    const FiniteDiffResult numeric = finite_diff_grad(p, batch, loss, mask, spec.eps);
    if (spec.corrupt) analytic.grad.b[spec.n - 1] *= 1.01;

    auto check = [&](double a, double b, bool learnable, bool kink, const std::string& what) {
      if (!learnable) return;
      ++report.evaluated;
      if (kink) {
        ++report.skipped;
        return;
      }
      const double rel = std::abs(a - b) / std::max({std::abs(a), std::abs(b), spec.floor});
      if (report.worst.empty() || rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst = "net " + std::to_string(k) + " " + what;
      }
    };
    for (int i = 0; i < spec.n; ++i) {
      for (int j = 0; j < spec.n; ++j) {
        const std::string ij = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
        check(analytic.grad.W(i, j), numeric.grad.W(i, j), mask.w(i, j),
              numeric.kink.W(i, j) != 0.0, "W" + ij);
        check(analytic.grad.V(i, j), numeric.grad.V(i, j), mask.v(i, j),
              numeric.kink.V(i, j) != 0.0, "V" + ij);
      }
      const std::string at = "[" + std::to_string(i) + "]";
      check(analytic.grad.tau[i], numeric.grad.tau[i], mask.tau[static_cast<std::size_t>(i)],
            numeric.kink.tau[i] != 0.0, "tau" + at);
      check(analytic.grad.b[i], numeric.grad.b[i], mask.b[static_cast<std::size_t>(i)],
            numeric.kink.b[i] != 0.0, "b" + at);
    }
  }
  return report;
}

}  // namespace sns
