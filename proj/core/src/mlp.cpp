#include "sns/mlp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "json_util.hpp"
#include "sns/error.hpp"

namespace sns {

MlpParams MlpParams::zeros(std::vector<int> sizes, double e_lo, double e_hi) {
  MlpParams p;
  p.sizes = std::move(sizes);
  p.e_lo = e_lo;
  p.e_hi = e_hi;
  for (std::size_t l = 0; l + 1 < p.sizes.size(); ++l) {
    p.W.push_back(Matrix::Zero(p.sizes[l + 1], p.sizes[l]));
    p.b.push_back(Vector::Zero(p.sizes[l + 1]));
  }
  p.validate();
  return p;
}

void MlpParams::validate() const {
  if (sizes.size() < 2) throw InvalidParameter("mlp: need at least two layer sizes");
  if (sizes.front() != 2 || sizes.back() != 1) {
    throw InvalidParameter("mlp: expected 2 inputs and 1 output");
  }
  for (int s : sizes) {
    if (s < 1) throw InvalidParameter("mlp: layer sizes must be >= 1");
  }
  if (W.size() != sizes.size() - 1 || b.size() != W.size()) {
    throw InvalidParameter("mlp: layer count mismatch");
  }
  for (std::size_t l = 0; l < W.size(); ++l) {
    if (W[l].rows() != sizes[l + 1] || W[l].cols() != sizes[l] ||
        b[l].size() != sizes[l + 1]) {
      throw InvalidParameter("mlp: layer shape mismatch");
    }
  }
  if (!(e_lo < e_hi)) throw InvalidParameter("mlp: e_lo must be < e_hi");
}

int MlpParams::parameter_count() const {
  int count = 0;
  for (std::size_t l = 0; l < W.size(); ++l) {
    count += static_cast<int>(W[l].size() + b[l].size());
  }
  return count;
}

MlpParams mlp_baseline(ArithOp op, std::uint64_t seed) {
  std::vector<int> sizes = op == ArithOp::Mul ? std::vector<int>{2, 2, 1}
                                              : std::vector<int>{2, 1};
  MlpParams p = MlpParams::zeros(sizes);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> excitatory(5.0, 20.0);
  std::uniform_real_distribution<double> hidden_w(-20.0, 20.0);
  std::uniform_real_distribution<double> hidden_b(0.0, 10.0);
  const std::size_t last = p.W.size() - 1;
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    for (Eigen::Index i = 0; i < p.W[l].rows(); ++i) {
      for (Eigen::Index j = 0; j < p.W[l].cols(); ++j) {
        p.W[l](i, j) = l == last ? excitatory(rng) : hidden_w(rng);
      }
      if (l != last) p.b[l][i] = hidden_b(rng);
    }
  }
  return p;
}

namespace {

// Flat scratch for one forward/backward pass.
struct Workspace {
  std::vector<std::vector<double>> x;  // activities entering each layer
  std::vector<std::vector<double>> u;  // pre-activations of each layer
  std::vector<std::vector<double>> delta;

  explicit Workspace(const MlpParams& p) {
    const std::size_t L = p.W.size();
    x.resize(L);
    u.resize(L);
    delta.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
      x[l].resize(static_cast<std::size_t>(p.sizes[l]));
      u[l].resize(static_cast<std::size_t>(p.sizes[l + 1]));
      delta[l].resize(static_cast<std::size_t>(p.sizes[l + 1]));
    }
  }
};

double forward(const MlpParams& p, Workspace& ws, double a, double b) {
  ws.x[0][0] = activation(a, p.e_lo, p.e_hi);
  ws.x[0][1] = activation(b, p.e_lo, p.e_hi);
  const std::size_t L = p.W.size();
  for (std::size_t l = 0; l < L; ++l) {
    const Matrix& W = p.W[l];
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      double s = p.b[l][i];
      for (Eigen::Index j = 0; j < W.cols(); ++j) s += W(i, j) * ws.x[l][j];
      ws.u[l][i] = s;
      if (l + 1 < L) ws.x[l + 1][i] = activation(s, p.e_lo, p.e_hi);
    }
  }
  return std::clamp(ws.u[L - 1][0], p.e_lo, p.e_hi);
}

// Accumulates d(scale * (out - y)^2) into gW/gb; returns the squared error.
double backward(const MlpParams& p, Workspace& ws, double a, double b, double y,
                double scale, std::vector<Matrix>& gW, std::vector<Vector>& gb) {
  const double out = forward(p, ws, a, b);
  const std::size_t L = p.W.size();
  const double err = out - y;
  const double u_out = ws.u[L - 1][0];
  ws.delta[L - 1][0] = 2.0 * scale * err * (u_out > p.e_lo && u_out < p.e_hi ? 1.0 : 0.0);
  for (std::size_t l = L; l-- > 0;) {
    const Matrix& W = p.W[l];
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      const double d = ws.delta[l][i];
      gb[l][i] += d;
      for (Eigen::Index j = 0; j < W.cols(); ++j) gW[l](i, j) += d * ws.x[l][j];
    }
    if (l == 0) break;
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < W.rows(); ++i) s += W(i, j) * ws.delta[l][i];
      ws.delta[l - 1][j] = s * activation_slope(ws.u[l - 1][j], p.e_lo, p.e_hi);
    }
  }
  return err * err;
}

void check_sequence(const Sequence& s, int warmup) {
  if (s.inputs.cols() != 2 || s.inputs.rows() != s.target.size()) {
    throw InvalidParameter("mlp: sequences need T x 2 inputs and T targets");
  }
  if (warmup < 0 || warmup >= s.target.size()) {
    throw InvalidParameter("mlp: warmup must be in [0, T)");
  }
}

std::vector<double> flatten(const MlpParams& p) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    flat.insert(flat.end(), p.W[l].data(), p.W[l].data() + p.W[l].size());
    flat.insert(flat.end(), p.b[l].data(), p.b[l].data() + p.b[l].size());
  }
  return flat;
}

std::vector<double> flatten(const std::vector<Matrix>& W, const std::vector<Vector>& b) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < W.size(); ++l) {
    flat.insert(flat.end(), W[l].data(), W[l].data() + W[l].size());
    flat.insert(flat.end(), b[l].data(), b[l].data() + b[l].size());
  }
  return flat;
}

void unflatten(const std::vector<double>& flat, MlpParams& p) {
  std::size_t k = 0;
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(k), p.W[l].size(), p.W[l].data());
    k += static_cast<std::size_t>(p.W[l].size());
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(k), p.b[l].size(), p.b[l].data());
    k += static_cast<std::size_t>(p.b[l].size());
  }
}

}  // namespace

double mlp_eval(const MlpParams& params, double a, double b) {
  params.validate();
  Workspace ws(params);
  return forward(params, ws, a, b);
}

double mlp_loss(const MlpParams& params, std::span<const Sequence> data, int warmup) {
  params.validate();
  if (data.empty()) throw InvalidParameter("mlp_loss: empty batch");
  Workspace ws(params);
  double total = 0.0;
  for (const Sequence& s : data) {
    check_sequence(s, warmup);
    const Eigen::Index T = s.target.size();
    double sum = 0.0;
    for (Eigen::Index t = warmup; t < T; ++t) {
      const double d = forward(params, ws, s.inputs(t, 0), s.inputs(t, 1)) - s.target[t];
      sum += d * d;
    }
    total += sum / static_cast<double>(T - warmup);
  }
  return total / static_cast<double>(data.size());
}

MlpTrainResult mlp_train(const MlpParams& init, const Dataset& data,
                         const TrainConfig& config) {
  config.validate();
  init.validate();
  if (data.examples.empty()) throw InvalidParameter("mlp_train: empty dataset");
  const int warmup = config.warmup.value_or(0);

  using Clock = std::chrono::steady_clock;
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  MlpTrainResult result;
  MlpParams params = init;
  result.params = params;
  Workspace ws(params);
  std::vector<double> flat = flatten(params);
  std::vector<double> m(flat.size(), 0.0), v(flat.size(), 0.0);
  long t_adam = 0;
  double best = mlp_loss(params, data.examples, warmup);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = Clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t first = 0; first < order.size();
         first += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t last =
          std::min(order.size(), first + static_cast<std::size_t>(config.batch_size));
      const double batch_n = static_cast<double>(last - first);
      std::vector<Matrix> gW;
      std::vector<Vector> gb;
      for (std::size_t l = 0; l < params.W.size(); ++l) {
        gW.push_back(Matrix::Zero(params.W[l].rows(), params.W[l].cols()));
        gb.push_back(Vector::Zero(params.b[l].size()));
      }
      for (std::size_t k = first; k < last; ++k) {
        const Sequence& s = data.examples[order[k]];
        check_sequence(s, warmup);
        const Eigen::Index T = s.target.size();
        const double scale = 1.0 / (batch_n * static_cast<double>(T - warmup));
        for (Eigen::Index t = warmup; t < T; ++t) {
          backward(params, ws, s.inputs(t, 0), s.inputs(t, 1), s.target[t], scale, gW, gb);
        }
      }
      const std::vector<double> g = flatten(gW, gb);
      adam_update(flat, g, m, v, ++t_adam, config.adam);
      unflatten(flat, params);
    }
    const double loss = mlp_loss(params, data.examples, warmup);
    if (!std::isfinite(loss)) throw TrainingDiverged("mlp_train: loss is not finite", epoch);
    result.curve.mse.push_back(loss);
    result.curve.seconds.push_back(
        std::chrono::duration<double>(Clock::now() - start).count());
    if (loss < best) {
      best = loss;
      result.params = params;
      result.best_epoch = epoch;
    }
    if (loss < config.stop_mse) break;
  }
  return result;
}

std::string mlp_to_json(const MlpParams& p) {
  p.validate();
  nlohmann::json doc;
  doc["sizes"] = p.sizes;
  doc["e_lo"] = p.e_lo;
  doc["e_hi"] = p.e_hi;
  auto layers = nlohmann::json::array();
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    nlohmann::json layer;
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < p.W[l].rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(p.W[l].cols()));
      for (Eigen::Index j = 0; j < p.W[l].cols(); ++j) row[j] = p.W[l](i, j);
      rows.push_back(row);
    }
    layer["W"] = std::move(rows);
    layer["b"] = std::vector<double>(p.b[l].data(), p.b[l].data() + p.b[l].size());
    layers.push_back(std::move(layer));
  }
  doc["layers"] = std::move(layers);
  return doc.dump(2);
}

MlpParams mlp_from_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    MlpParams p = MlpParams::zeros(doc.at("sizes").get<std::vector<int>>(),
                                   doc.value("e_lo", 0.0), doc.value("e_hi", 20.0));
    const auto& layers = doc.at("layers");
    if (layers.size() != p.W.size()) throw InvalidParameter("mlp json: layer count mismatch");
    for (std::size_t l = 0; l < p.W.size(); ++l) {
      const auto& rows = layers[l].at("W");
      for (Eigen::Index i = 0; i < p.W[l].rows(); ++i) {
        for (Eigen::Index j = 0; j < p.W[l].cols(); ++j) {
          p.W[l](i, j) = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j)).get<double>();
        }
      }
      const auto bias = layers[l].at("b").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(bias.size()) != p.b[l].size()) {
        throw InvalidParameter("mlp json: bias length mismatch");
      }
      for (std::size_t i = 0; i < bias.size(); ++i) p.b[l][static_cast<Eigen::Index>(i)] = bias[i];
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("mlp json: ") + e.what());
  }
}

}  // namespace sns
