#include "sns/dataset.hpp"

#include <random>

#include "sns/error.hpp"

namespace sns {

Dataset gen_dataset(ArithOp op, int n, int T, double dt, std::uint64_t seed,
                    double lo, double hi) {
  if (n < 1 || T < 1) throw InvalidParameter("gen_dataset: n and T must be >= 1");
  if (!(dt > 0.0)) throw InvalidParameter("gen_dataset: dt must be > 0");
  if (!(lo < hi)) throw InvalidParameter("gen_dataset: empty feature range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> feature(lo, hi);
  Dataset data;
  data.T = T;
  data.dt = dt;
  data.seed = seed;
  data.examples.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double a = feature(rng);
    const double b = feature(rng);
    Sequence s;
    s.inputs.resize(T, 2);
    s.inputs.col(0).setConstant(a);
    s.inputs.col(1).setConstant(b);
    s.target = Vector::Constant(T, ideal_op(op, a, b));
    data.examples.push_back(std::move(s));
  }
  return data;
}

double mse_loss(std::span<const double> pred, std::span<const double> label,
                int warmup) {
  if (pred.size() != label.size()) {
    throw InvalidParameter("mse_loss: series lengths differ");
  }
  const int T = static_cast<int>(pred.size());
  if (warmup < 0 || warmup >= T) {
    throw InvalidParameter("mse_loss: warmup must be in [0, T)");
  }
  double sum = 0.0;
  for (int t = warmup; t < T; ++t) {
    const double d = pred[t] - label[t];
    sum += d * d;
  }
  return sum / (T - warmup);
}

}  // namespace sns
