#include "projcal/training.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "projcal/errors.hpp"
#include "projcal/rng.hpp"

namespace projcal {

const char* to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "sgd"; }

Optimizer optimizer_from_string(const std::string& s) {
  if (s == "adam") return Optimizer::adam;
  if (s == "sgd") return Optimizer::sgd;
  throw ConfigError("train.optimizer: expected \"adam\" or \"sgd\", got \"" + s + "\"");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate: must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train.momentum: must lie in [0, 1)");
  if (batch_size < 1) throw ConfigError("train.batch_size: must be >= 1");
  if (epochs < 1) throw ConfigError("train.epochs: must be >= 1");
}

double evaluate_mse(const PolicyWeights& weights, std::span<const Sample> samples) {
  if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (const Sample& s : samples) {
    const OffsetEstimate y = forward(weights, s.input);
    const double rx = y.dx - s.target.dx;
    const double ry = y.dy - s.target.dy;
    total += 0.5 * (rx * rx + ry * ry);
  }
  return total / static_cast<double>(samples.size());
}

double evaluate_rmse(const PolicyWeights& weights, std::span<const Sample> samples) {
  return std::sqrt(2.0 * evaluate_mse(weights, samples));
}

TrainResult train_samples(std::span<const Sample> train, std::span<const Sample> test, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw EmptySplitError("training split is empty");

  TrainResult result;
  result.weights = PolicyWeights::he_init(cfg.seed);
  result.initial_train_mse = evaluate_mse(result.weights, train);

  // first moment (or velocity) and second moment per tensor
  std::vector<std::vector<float>> m1, m2;
  for (const Tensor& t : result.weights.tensors) {
    m1.emplace_back(t.values.size(), 0.0f);
    m2.emplace_back(t.values.size(), 0.0f);
  }

  Rng rng = Rng::stream(cfg.seed, 0, 0x7a11);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const auto lr = static_cast<float>(cfg.learning_rate);
  const auto mu = static_cast<float>(cfg.momentum);
  const auto beta2 = static_cast<float>(kAdamBeta2);
  const auto eps = static_cast<float>(kAdamEpsilon);
  long step = 0;
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  std::vector<const InputTensor*> inputs;
  std::vector<OffsetEstimate> targets;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      inputs.clear();
      targets.clear();
      for (std::size_t i = start; i < end; ++i) {
        inputs.push_back(&train[order[i]].input);
        targets.push_back(train[order[i]].target);
      }
      const Gradients g = backward_batch(result.weights, inputs, targets);
      if (!std::isfinite(g.loss)) {
        throw DivergenceError("training loss became non-finite at epoch " + std::to_string(epoch));
      }
      loss_sum += g.loss;
      ++batches;
      ++step;
      const auto c1 = static_cast<float>(1.0 - std::pow(cfg.momentum, static_cast<double>(step)));
      const auto c2 = static_cast<float>(1.0 - std::pow(kAdamBeta2, static_cast<double>(step)));
      for (std::size_t t = 0; t < m1.size(); ++t) {
        std::vector<float>& v = m1[t];
        std::vector<float>& s = m2[t];
        std::vector<float>& w = result.weights.tensors[t].values;
        const std::vector<float>& grad = g.grads.tensors[t].values;
        if (cfg.optimizer == Optimizer::sgd) {
          for (std::size_t k = 0; k < w.size(); ++k) {
            v[k] = mu * v[k] + grad[k];
            w[k] -= lr * v[k];
          }
          continue;
        }
        for (std::size_t k = 0; k < w.size(); ++k) {
          v[k] = mu * v[k] + (1.0f - mu) * grad[k];
          s[k] = beta2 * s[k] + (1.0f - beta2) * grad[k] * grad[k];
          w[k] -= lr * (v[k] / c1) / (std::sqrt(s[k] / c2) + eps);
        }
      }
    }
    EpochLog row;
    row.epoch = epoch;
    row.train_mse = loss_sum / batches;
    row.test_mse = evaluate_mse(result.weights, test);
    result.log.push_back(row);
  }
  if (!result.weights.all_finite()) throw DivergenceError("training produced non-finite weights");
  return result;
}

std::vector<Sample> load_samples(const DatasetManifest& manifest, const std::filesystem::path& dataset_dir,
                                 std::span<const int> sequence_ids) {
  std::vector<Sample> out;
  for (int id : sequence_ids) {
    for (const Demonstration& d : manifest.sequence(id).steps) {
      out.push_back({preprocess(read_ppm(dataset_dir / d.image)), d.offset});
    }
  }
  return out;
}

TrainResult train(const DatasetManifest& manifest, const std::filesystem::path& dataset_dir, const TrainConfig& cfg) {
  cfg.validate();
  if (manifest.split.train.empty()) throw EmptySplitError("manifest has an empty training split");
  const std::vector<Sample> train_set = load_samples(manifest, dataset_dir, manifest.split.train);
  const std::vector<Sample> test_set = load_samples(manifest, dataset_dir, manifest.split.test);
  return train_samples(train_set, test_set, cfg);
}

std::string loss_log_csv(const std::vector<EpochLog>& log) {
  std::ostringstream out;
  out.precision(9);
  out << "epoch,train_mse,test_mse\n";
  for (const EpochLog& row : log) out << row.epoch << ',' << row.train_mse << ',' << row.test_mse << '\n';
  return out.str();
}

}  // namespace projcal
