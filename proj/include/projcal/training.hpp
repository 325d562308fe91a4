#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "projcal/dataset.hpp"
#include "projcal/network.hpp"

namespace projcal {

enum class Optimizer { adam, sgd };

const char* to_string(Optimizer o);
/// Throws ConfigError for unknown names.
Optimizer optimizer_from_string(const std::string& s);

/// `momentum` is the first-moment decay for adam and the velocity decay for sgd.
struct TrainConfig {
  Optimizer optimizer = Optimizer::adam;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int batch_size = 16;
  int epochs = 60;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct Sample {
  InputTensor input;
  OffsetEstimate target;
};

struct EpochLog {
  int epoch = 0;
  double train_mse = 0.0;  // mean minibatch loss over the epoch
  double test_mse = 0.0;   // full pass after the epoch; NaN without test data
};

struct TrainResult {
  PolicyWeights weights;
  std::vector<EpochLog> log;
  double initial_train_mse = 0.0;
};

/// Mean of 0.5 * |prediction - target|^2, i.e. the per-component mean squared error.
double evaluate_mse(const PolicyWeights& weights, std::span<const Sample> samples);

/// Root mean squared l2 error of the 2-vector predictions, meters.
double evaluate_rmse(const PolicyWeights& weights, std::span<const Sample> samples);

inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

/// Minibatch training from a He initialization, with adam (bias-corrected) or sgd with momentum.
/// Throws EmptySplitError without training data and DivergenceError on a non-finite loss.
TrainResult train_samples(std::span<const Sample> train, std::span<const Sample> test, const TrainConfig& cfg);

/// Loads and preprocesses every demonstration of the listed sequences.
std::vector<Sample> load_samples(const DatasetManifest& manifest, const std::filesystem::path& dataset_dir,
                                 std::span<const int> sequence_ids);

TrainResult train(const DatasetManifest& manifest, const std::filesystem::path& dataset_dir, const TrainConfig& cfg);

/// "epoch,train_mse,test_mse" header plus one row per epoch.
std::string loss_log_csv(const std::vector<EpochLog>& log);

}  // namespace projcal
