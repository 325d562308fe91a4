#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "projcal/correction.hpp"
#include "projcal/dataset.hpp"
#include "projcal/scene.hpp"
#include "projcal/training.hpp"

namespace projcal {

struct EvalSettings {
  int n_trials = 30;
  std::uint64_t seed = 99;
  double threshold = 0.9;  // minimum convergence rate for a zero exit code
  bool operator==(const EvalSettings&) const = default;
};

/// Scene, generation, training, loop and evaluation settings from one JSON file.
/// The loop renders at the generation resolution so train and test images match.
struct RunConfig {
  SceneConfig scene{};
  GenConfig gen{};
  TrainConfig train{};
  LoopConfig loop{};
  EvalSettings evaluate{};

  /// Propagates one seed into every stage.
  void set_seed(std::uint64_t seed);

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  static RunConfig from_json_text(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  std::string to_json_text() const;
};

}  // namespace projcal
