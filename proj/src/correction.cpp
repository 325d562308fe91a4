#include "projcal/correction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "projcal/errors.hpp"
#include "projcal/serialization.hpp"

namespace projcal {

const char* to_string(EstimatorKind kind) { return kind == EstimatorKind::learned ? "learned" : "analytic"; }

EstimatorKind estimator_from_string(const std::string& s) {
  if (s == "learned") return EstimatorKind::learned;
  if (s == "analytic") return EstimatorKind::analytic;
  throw ConfigError("loop.estimator: expected \"learned\" or \"analytic\", got \"" + s + "\"");
}

void LoopConfig::validate() const {
  if (!(step_size > 0.0 && step_size <= 1.0)) throw ConfigError("loop.step_size: must lie in (0, 1]");
  if (!(epsilon > 0.0)) throw ConfigError("loop.epsilon: must be > 0");
  if (max_iterations < 1) throw ConfigError("loop.max_iterations: must be >= 1");
  if (resolution.width <= 0 || resolution.height <= 0) throw ConfigError("loop.resolution: must be positive");
}

EpisodeTrace run_episode(const SceneConfig& scene, const LoopConfig& loop, const Policy& policy,
                         const OffsetEstimate& injected, const std::optional<std::filesystem::path>& dump_dir) {
  loop.validate();
  if (dump_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*dump_dir, ec);
    if (ec) throw IoError("cannot create dump directory '" + dump_dir->string() + "': " + ec.message());
  }

  EpisodeTrace trace;
  trace.injected = injected;
  trace.tag_center = scene.tag.center;
  RigidTransform believed = apply_offset(scene.true_extrinsics, injected);

  for (int it = 1; it <= loop.max_iterations; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    rec.believed = believed;
    rec.residual = translation_offset(believed, scene.true_extrinsics);
    trace.iterations_used = it;

    OffsetEstimate prediction;
    try {
      const Image img = render_scene(scene, believed, loop.resolution);
      if (dump_dir) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%03d.ppm", it - 1);
        rec.image_path = (*dump_dir / name).string();
        write_ppm(*dump_dir / name, img);
      }
      prediction = policy.estimate(img);
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      trace.aborted = true;
      trace.abort_reason = e.what();
      trace.iterations.push_back(std::move(rec));
      break;
    }
    rec.prediction = prediction;
    trace.iterations.push_back(std::move(rec));

    believed = apply_offset(believed, {-loop.step_size * prediction.dx, -loop.step_size * prediction.dy});
    if (prediction.norm() < loop.epsilon) {
      trace.converged = true;
      break;
    }
  }

  trace.final_believed = believed;
  trace.final_error = translation_offset(believed, scene.true_extrinsics).norm();
  return trace;
}

EvaluationReport run_evaluation(const SceneConfig& scene, const GenConfig& gen, const LoopConfig& loop,
                                const Policy& policy, int n_trials, std::uint64_t seed) {
  if (n_trials < 1) throw ConfigError("evaluate.n_trials: must be >= 1");
  EvaluationReport report;
  report.n_trials = n_trials;
  for (int trial = 0; trial < n_trials; ++trial) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(trial), 0xe7a1);
    TrialResult r;
    r.trial = trial;
    try {
      const SceneConfig placed = scene.with_tag_center(sample_tag_center(scene, gen, rng));
      const OffsetEstimate injected = sample_offset(gen.max_offset, rng);
      r.trace = run_episode(placed, loop, policy, injected);
    } catch (const PlacementError& e) {
      r.trace.aborted = true;
      r.trace.abort_reason = e.what();
      r.trace.final_error = std::numeric_limits<double>::quiet_NaN();
    }
    report.episodes.push_back(std::move(r));
  }

  std::vector<double> errors;
  int converged = 0;
  double iterations = 0.0;
  for (const TrialResult& r : report.episodes) {
    converged += r.trace.converged ? 1 : 0;
    iterations += r.trace.iterations_used;
    // Episodes that never started carry no error; they poison the error statistics.
    errors.push_back(std::isfinite(r.trace.final_error) ? r.trace.final_error : std::numeric_limits<double>::infinity());
  }
  report.convergence_rate = static_cast<double>(converged) / n_trials;
  report.mean_iterations = iterations / n_trials;
  std::sort(errors.begin(), errors.end());
  const std::size_t n = errors.size();
  double sum = 0.0;
  for (double e : errors) sum += e;
  report.mean_final_error = sum / static_cast<double>(n);
  report.median_final_error = n % 2 ? errors[n / 2] : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
  report.max_final_error = errors.back();
  return report;
}

namespace {

Json offset_json(const OffsetEstimate& e) { return Json::array({e.dx, e.dy}); }

Json trace_json(const EpisodeTrace& t) {
  Json iters = Json::array();
  for (const IterationRecord& r : t.iterations) {
    Json row{{"iteration", r.iteration},
             {"believed_translation", Json::array({r.believed.translation.x(), r.believed.translation.y(), r.believed.translation.z()})},
             {"residual", offset_json(r.residual)},
             {"prediction", offset_json(r.prediction)}};
    if (!r.image_path.empty()) row["image"] = r.image_path;
    iters.push_back(row);
  }
  Json j{{"injected", offset_json(t.injected)},
         {"tag_center", Json::array({t.tag_center.x(), t.tag_center.y(), t.tag_center.z()})},
         {"converged", t.converged},
         {"aborted", t.aborted},
         {"iterations_used", t.iterations_used},
         {"final_error_m", std::isfinite(t.final_error) ? Json(t.final_error) : Json(nullptr)},
         {"final_believed", to_json(t.final_believed)},
         {"iterations", iters}};
  if (t.aborted) j["abort_reason"] = t.abort_reason;
  return j;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string trace_to_json(const EpisodeTrace& trace) { return trace_json(trace).dump(2) + "\n"; }

std::string report_to_json(const EvaluationReport& report) {
  Json episodes = Json::array();
  for (const TrialResult& r : report.episodes) {
    episodes.push_back(Json{{"trial", r.trial},
                            {"tag_center", Json::array({r.trace.tag_center.x(), r.trace.tag_center.y(), r.trace.tag_center.z()})},
                            {"injected", offset_json(r.trace.injected)},
                            {"converged", r.trace.converged},
                            {"aborted", r.trace.aborted},
                            {"iterations", r.trace.iterations_used},
                            {"final_error_m", finite_or_null(r.trace.final_error)}});
  }
  Json j{{"n_trials", report.n_trials},
         {"convergence_rate", report.convergence_rate},
         {"mean_final_error_m", finite_or_null(report.mean_final_error)},
         {"median_final_error_m", finite_or_null(report.median_final_error)},
         {"max_final_error_m", finite_or_null(report.max_final_error)},
         {"mean_iterations", report.mean_iterations},
         {"episodes", episodes}};
  return j.dump(2) + "\n";
}

}  // namespace projcal
