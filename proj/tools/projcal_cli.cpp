// projcal: generate, train, evaluate, episode, demo-wireframe.
// Exit codes: 0 ok, 1 validation error, 2 I/O error, 3 gate failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "projcal/correction.hpp"
#include "projcal/dataset.hpp"
#include "projcal/errors.hpp"
#include "projcal/network.hpp"
#include "projcal/policy.hpp"
#include "projcal/run_config.hpp"
#include "projcal/scene.hpp"
#include "projcal/training.hpp"

namespace fs = std::filesystem;
using namespace projcal;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitGate = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
};

struct EstimatorFlags {
  std::string weights;
  bool analytic = false;
  bool perfect = false;
};

RunConfig load_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : RunConfig::load(c.config);
  if (c.seed) cfg.set_seed(*c.seed);
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

OffsetEstimate parse_offset(const std::string& s) {
  std::istringstream in(s);
  double dx = 0.0, dy = 0.0;
  char comma = 0;
  if (!(in >> dx >> comma >> dy) || comma != ',' || !(in >> std::ws).eof()) {
    throw ConfigError("--inject: expected dx,dy in meters, got '" + s + "'");
  }
  return {dx, dy};
}

std::unique_ptr<Policy> make_policy(const EstimatorFlags& f, const SceneConfig& scene) {
  if (f.analytic) return std::make_unique<AnalyticPolicy>(Calibration{scene.camera, scene.plane});
  if (f.weights.empty()) throw ConfigError("estimator: pass --weights PATH or --analytic");
  return std::make_unique<LearnedPolicy>(load_weights(f.weights));
}

int cmd_generate(const Common& c, int n_sequences, const std::string& out, int threads) {
  RunConfig cfg = load_config(c);
  if (n_sequences > 0) cfg.gen.n_sequences = n_sequences;
  cfg.validate();
  const DatasetManifest m = generate_dataset(cfg.scene, cfg.gen, out, threads);
  std::printf("%d sequences (%zu train / %zu test)\n", cfg.gen.n_sequences, m.split.train.size(), m.split.test.size());
  return kExitOk;
}

int cmd_train(const Common& c, const std::string& manifest_path, const std::string& out, const std::string& log_path) {
  RunConfig cfg = load_config(c);
  cfg.validate();
  const DatasetManifest m = read_manifest(manifest_path);
  const TrainResult r = train(m, fs::path(manifest_path).parent_path(), cfg.train);
  save_weights(out, r.weights);
  if (!log_path.empty()) write_text(log_path, loss_log_csv(r.log));
  const EpochLog& last = r.log.back();
  std::printf("trained %d epochs: train_mse %.6g test_mse %.6g\n", last.epoch, last.train_mse, last.test_mse);
  return kExitOk;
}

int cmd_evaluate(const Common& c, const EstimatorFlags& est, const std::string& manifest_path, int n_trials,
                 std::optional<double> threshold, const std::string& report_path) {
  RunConfig cfg = load_config(c);
  if (n_trials > 0) cfg.evaluate.n_trials = n_trials;
  if (threshold) cfg.evaluate.threshold = *threshold;
  if (est.analytic) cfg.loop.estimator = EstimatorKind::analytic;
  cfg.validate();
  if (!manifest_path.empty()) {
    const DatasetManifest m = read_manifest(manifest_path);
    if (!(m.scene == cfg.scene)) throw ConfigError("scene: configuration does not match the manifest's scene snapshot");
  }
  const auto policy = make_policy(est, cfg.scene);
  const EvaluationReport rep =
      run_evaluation(cfg.scene, cfg.gen, cfg.loop, *policy, cfg.evaluate.n_trials, cfg.evaluate.seed);
  const std::string json = report_to_json(rep);
  if (!report_path.empty()) write_text(report_path, json);
  std::printf("%s: %d trials, convergence %.3f, mean final error %.6g m, median %.6g m, max %.6g m\n",
              policy->name().c_str(), rep.n_trials, rep.convergence_rate, rep.mean_final_error,
              rep.median_final_error, rep.max_final_error);
  if (rep.convergence_rate < cfg.evaluate.threshold) {
    std::fprintf(stderr, "gate: convergence rate %.3f below threshold %.3f\n", rep.convergence_rate,
                 cfg.evaluate.threshold);
    return kExitGate;
  }
  return kExitOk;
}

int cmd_episode(const Common& c, const EstimatorFlags& est, const std::string& inject, const std::string& dump,
                const std::string& trace_path) {
  RunConfig cfg = load_config(c);
  if (est.analytic) cfg.loop.estimator = EstimatorKind::analytic;
  cfg.validate();
  const OffsetEstimate e = parse_offset(inject);
  const auto policy = make_policy(est, cfg.scene);
  std::optional<fs::path> dir;
  if (!dump.empty()) dir = dump;
  const EpisodeTrace t = run_episode(cfg.scene, cfg.loop, *policy, e, dir);
  const std::string json = trace_to_json(t);
  if (trace_path.empty()) {
    std::cout << json;
  } else {
    write_text(trace_path, json);
    std::printf("converged %s after %d iterations, final error %.6g m\n", t.converged ? "true" : "false",
                t.iterations_used, t.final_error);
  }
  return kExitOk;
}

int cmd_wireframe(const Common& c, const EstimatorFlags& est, const std::string& inject, double cube_side,
                  const std::string& out) {
  RunConfig cfg = load_config(c);
  cfg.validate();
  RigidTransform believed = cfg.scene.true_extrinsics;
  if (!est.perfect) {
    const auto policy = make_policy(est, cfg.scene);
    const EpisodeTrace t = run_episode(cfg.scene, cfg.loop, *policy, parse_offset(inject));
    believed = t.final_believed;
    std::printf("corrected in %d iterations, final error %.6g m\n", t.iterations_used, t.final_error);
  }
  write_ppm(out, render_wireframe_cube(cfg.scene, believed, cube_side));
  return kExitOk;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON run configuration");
  sub->add_option("--seed", c.seed, "seed for every stage");
}

void add_estimator(CLI::App* sub, EstimatorFlags& f) {
  auto* w = sub->add_option("--weights", f.weights, "trained weights file");
  auto* a = sub->add_flag("--analytic", f.analytic, "geometric centroid estimator");
  w->excludes(a);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Camera-projector extrinsic auto-correction"};
  app.require_subcommand(1);

  Common common;
  EstimatorFlags est;

  int n_sequences = 0;
  int threads = 1;
  std::string out, manifest, log_path, report, inject = "0.05,0", dump, trace;
  int n_trials = 0;
  std::optional<double> threshold;
  double cube_side = 0.10;

  auto* gen = app.add_subcommand("generate", "render the demonstration dataset");
  add_common(gen, common);
  gen->add_option("--n-sequences", n_sequences, "number of sequences")->check(CLI::PositiveNumber);
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  auto* tr = app.add_subcommand("train", "fit the regressor on a generated dataset");
  add_common(tr, common);
  tr->add_option("--manifest", manifest, "manifest.json of the dataset")->required();
  tr->add_option("--out", out, "weights output path")->required();
  tr->add_option("--log", log_path, "loss log CSV path");

  auto* ev = app.add_subcommand("evaluate", "closed-loop trials with random placements");
  add_common(ev, common);
  add_estimator(ev, est);
  ev->add_option("--manifest", manifest, "check the scene against this dataset manifest");
  ev->add_option("--n-trials", n_trials, "number of trials")->check(CLI::PositiveNumber);
  ev->add_option("--threshold", threshold, "minimum convergence rate")->check(CLI::Range(0.0, 1.0));
  ev->add_option("--report", report, "report JSON path");

  auto* ep = app.add_subcommand("episode", "one correction episode");
  add_common(ep, common);
  add_estimator(ep, est);
  ep->add_option("--inject", inject, "injected offset dx,dy in meters")->required();
  ep->add_option("--dump", dump, "directory for frame_NNN.ppm");
  ep->add_option("--trace", trace, "trace JSON path (stdout when omitted)");

  auto* wf = app.add_subcommand("demo-wireframe", "render a cube wireframe under corrected extrinsics");
  add_common(wf, common);
  add_estimator(wf, est);
  auto* perfect = wf->add_flag("--perfect", est.perfect, "use the true extrinsics");
  wf->add_option("--inject", inject, "injected offset dx,dy before correction");
  wf->add_option("--cube-side", cube_side, "cube edge in meters")->check(CLI::NonNegativeNumber);
  wf->add_option("--out", out, "output PPM path")->required();
  perfect->excludes("--weights")->excludes("--analytic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*gen) return cmd_generate(common, n_sequences, out, threads);
    if (*tr) return cmd_train(common, manifest, out, log_path);
    if (*ev) return cmd_evaluate(common, est, manifest, n_trials, threshold, report);
    if (*ep) return cmd_episode(common, est, inject, dump, trace);
    if (*wf) return cmd_wireframe(common, est, inject, cube_side, out);
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const CorruptFileError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return kExitValidation;
}
