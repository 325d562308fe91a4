#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "projcal/dataset.hpp"
#include "projcal/geometry.hpp"
#include "projcal/policy.hpp"
#include "projcal/scene.hpp"

namespace projcal {

enum class EstimatorKind { learned, analytic };

const char* to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& s);

struct LoopConfig {
  double step_size = 0.5;
  double epsilon = 1e-3;
  int max_iterations = 50;
  EstimatorKind estimator = EstimatorKind::learned;
  Resolution resolution{};

  void validate() const;
  bool operator==(const LoopConfig&) const = default;
};

struct IterationRecord {
  int iteration = 0;                // 1-based
  RigidTransform believed;          // extrinsics used to render this iteration's image
  OffsetEstimate residual;          // believed - true translation (x, y) at render time
  OffsetEstimate prediction;
  std::string image_path;           // set when frames are dumped
};

struct EpisodeTrace {
  OffsetEstimate injected;
  Vec3 tag_center = Vec3::Zero();
  std::vector<IterationRecord> iterations;
  bool converged = false;
  bool aborted = false;
  std::string abort_reason;
  int iterations_used = 0;
  RigidTransform final_believed;
  double final_error = 0.0;  // |believed - true| over translation x, y at termination
};

/// Render, estimate, step believed <- believed - alpha * estimate, until the
/// estimate norm drops below epsilon or the iteration cap is reached. When
/// dump_dir is set, frames are written there as frame_000.ppm, frame_001.ppm, ...
EpisodeTrace run_episode(const SceneConfig& scene, const LoopConfig& loop, const Policy& policy,
                         const OffsetEstimate& injected,
                         const std::optional<std::filesystem::path>& dump_dir = std::nullopt);

struct TrialResult {
  int trial = 0;
  EpisodeTrace trace;
};

struct EvaluationReport {
  int n_trials = 0;
  double convergence_rate = 0.0;
  double mean_final_error = 0.0;
  double median_final_error = 0.0;
  double max_final_error = 0.0;
  double mean_iterations = 0.0;
  std::vector<TrialResult> episodes;  // ordered by trial index
};

/// Seeded trials with random tag placement in gen.region and injected offsets
/// uniform in [-gen.max_offset, gen.max_offset]^2. Aborted episodes count as
/// not converged.
EvaluationReport run_evaluation(const SceneConfig& scene, const GenConfig& gen, const LoopConfig& loop,
                                const Policy& policy, int n_trials, std::uint64_t seed);

std::string trace_to_json(const EpisodeTrace& trace);
std::string report_to_json(const EvaluationReport& report);

}  // namespace projcal
