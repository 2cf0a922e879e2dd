#include "sns/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "json_util.hpp"
#include "sns/error.hpp"

namespace sns {

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidParameter("train config: epochs must be >= 1");
  if (batch_size < 1) throw InvalidParameter("train config: batch_size must be >= 1");
  if (examples < 1 || seq_len < 1) {
    throw InvalidParameter("train config: examples and seq_len must be >= 1");
  }
  if (!(dt > 0.0)) throw InvalidParameter("train config: dt must be > 0");
  if (warmup && (*warmup < 0 || *warmup >= seq_len)) {
    throw InvalidParameter("train config: warmup must be in [0, seq_len)");
  }
  if (!(stop_mse >= 0.0)) throw InvalidParameter("train config: stop_mse must be >= 0");
  adam.validate();
}

namespace {

TrainConfig config_from(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InvalidParameter("train config: expected an object");
  TrainConfig c;
  try {
    c.epochs = doc.value("epochs", c.epochs);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.adam.learning_rate = doc.value("learning_rate", c.adam.learning_rate);
    c.adam.beta1 = doc.value("beta1", c.adam.beta1);
    c.adam.beta2 = doc.value("beta2", c.adam.beta2);
    c.adam.epsilon = doc.value("epsilon", c.adam.epsilon);
    if (doc.contains("output_neuron") && !doc["output_neuron"].is_null()) {
      c.output = doc["output_neuron"].get<int>();
    }
    if (doc.contains("warmup") && !doc["warmup"].is_null()) {
      c.warmup = doc["warmup"].get<int>();
    }
    c.seed = doc.value("seed", c.seed);
    c.stop_mse = doc.value("stop_mse", c.stop_mse);
    c.examples = doc.value("examples", c.examples);
    c.seq_len = doc.value("seq_len", c.seq_len);
    c.dt = doc.value("dt", c.dt);
    c.data_seed = doc.value("data_seed", c.data_seed);
    c.init_seed = doc.value("init_seed", c.init_seed);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace

TrainConfig train_config_from_json(const std::string& text) {
  try {
    return config_from(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidParameter(std::string("train config: ") + e.what());
  }
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  return config_from(detail::read_json_file(path));
}

std::string train_config_to_json(const TrainConfig& c) {
  nlohmann::json doc;
  doc["epochs"] = c.epochs;
  doc["batch_size"] = c.batch_size;
  doc["learning_rate"] = c.adam.learning_rate;
  doc["beta1"] = c.adam.beta1;
  doc["beta2"] = c.adam.beta2;
  doc["epsilon"] = c.adam.epsilon;
  doc["output_neuron"] = c.output ? nlohmann::json(*c.output) : nlohmann::json();
  doc["warmup"] = c.warmup ? nlohmann::json(*c.warmup) : nlohmann::json();
  doc["seed"] = c.seed;
  doc["stop_mse"] = c.stop_mse;
  doc["examples"] = c.examples;
  doc["seq_len"] = c.seq_len;
  doc["dt"] = c.dt;
  doc["data_seed"] = c.data_seed;
  doc["init_seed"] = c.init_seed;
  return doc.dump(2);
}

double LossCurve::final_mse() const {
  if (mse.empty()) throw InvalidParameter("loss curve is empty");
  return mse.back();
}

double LossCurve::best_mse() const {
  if (mse.empty()) throw InvalidParameter("loss curve is empty");
  return *std::min_element(mse.begin(), mse.end());
}

int LossCurve::epochs_to(double threshold) const {
  for (std::size_t k = 0; k < mse.size(); ++k) {
    if (mse[k] < threshold) return static_cast<int>(k) + 1;
  }
  return -1;
}

std::string loss_curve_csv(const LossCurve& curve) {
  std::ostringstream out;
  out << "epoch,mse,seconds\n" << std::setprecision(17);
  for (std::size_t k = 0; k < curve.mse.size(); ++k) {
    out << k + 1 << ',' << curve.mse[k] << ',' << curve.seconds[k] << '\n';
  }
  return out.str();
}

LossSpec loss_spec(const Topology& topology, const TrainConfig& config) {
  return {config.output.value_or(topology.output),
          config.warmup.value_or(topology.warmup)};
}

TrainResult train(const NetworkParams& init, const LearnMask& mask,
                  const LossSpec& spec, const Dataset& data,
                  const TrainConfig& config) {
  config.validate();
  init.validate();
  if (data.examples.empty()) throw InvalidParameter("train: empty dataset");

  using Clock = std::chrono::steady_clock;
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const Sequence*> batch;
  batch.reserve(static_cast<std::size_t>(config.batch_size));

  TrainResult result;
  NetworkParams params = init;
  AdamState opt = AdamState::zeros(params.n);
  result.params = params;
  double best = batch_loss(params, data.examples, spec);
  if (!std::isfinite(best)) throw TrainingDiverged("train: initial loss is not finite", 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = Clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t first = 0; first < order.size();
         first += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t last =
          std::min(order.size(), first + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t k = first; k < last; ++k) batch.push_back(&data.examples[order[k]]);
      LossAndGrad lg;
      try {
        lg = bptt_grad(params, batch, spec, mask);
      } catch (const NumericalFault& e) {
        throw TrainingDiverged(std::string("train: ") + e.what(), epoch);
      }
      if (!std::isfinite(lg.loss)) {
        throw TrainingDiverged("train: minibatch loss is not finite", epoch);
      }
      adam_step(opt, params, lg.grad, config.adam, mask);
    }
    double loss = 0.0;
    try {
      loss = batch_loss(params, data.examples, spec);
    } catch (const NumericalFault& e) {
      throw TrainingDiverged(std::string("train: ") + e.what(), epoch);
    }
    if (!std::isfinite(loss)) throw TrainingDiverged("train: loss is not finite", epoch);
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

TrainResult train(const Topology& topology, const Dataset& data,
                  const TrainConfig& config) {
  return train(topology.init, topology.learn_mask(), loss_spec(topology, config),
               data, config);
}

}  // namespace sns
