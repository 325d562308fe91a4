#include "projcal/run_config.hpp"

#include <fstream>
#include <sstream>

#include "projcal/errors.hpp"
#include "projcal/serialization.hpp"

namespace projcal {

void RunConfig::set_seed(std::uint64_t seed) {
  gen.seed = seed;
  train.seed = seed;
  evaluate.seed = seed;
}

void RunConfig::validate() const {
  scene.validate();
  gen.validate();
  train.validate();
  loop.validate();
  if (evaluate.n_trials < 1) throw ConfigError("evaluate.n_trials: must be >= 1");
  if (!(evaluate.threshold >= 0.0 && evaluate.threshold <= 1.0)) throw ConfigError("evaluate.threshold: must lie in [0, 1]");
  if (!(loop.resolution == gen.resolution)) throw ConfigError("loop.resolution: must match gen.resolution");
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  RunConfig cfg;
  StrictObject o(j, "config");
  if (o.has("scene")) cfg.scene = scene_from_json(o.raw("scene"), cfg.scene);
  if (o.has("gen")) cfg.gen = gen_from_json(o.raw("gen"), cfg.gen);
  if (o.has("train")) cfg.train = train_from_json(o.raw("train"), cfg.train);
  if (o.has("loop")) cfg.loop = loop_from_json(o.raw("loop"), cfg.loop);
  if (o.has("evaluate")) {
    StrictObject e(o.raw("evaluate"), "evaluate");
    cfg.evaluate.n_trials = e.integer("n_trials", cfg.evaluate.n_trials);
    cfg.evaluate.seed = e.unsigned_integer("seed", cfg.evaluate.seed);
    cfg.evaluate.threshold = e.number("threshold", cfg.evaluate.threshold);
    e.finish();
  }
  if (o.has("seed")) cfg.set_seed(o.unsigned_integer("seed", 0));
  o.finish();
  cfg.loop.resolution = cfg.gen.resolution;
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return from_json_text(ss.str());
}

std::string RunConfig::to_json_text() const {
  Json j{{"scene", to_json(scene)},
         {"gen", to_json(gen)},
         {"train", to_json(train)},
         {"loop", to_json(loop)},
         {"evaluate", {{"n_trials", evaluate.n_trials}, {"seed", evaluate.seed}, {"threshold", evaluate.threshold}}}};
  return j.dump(2) + "\n";
}

}  // namespace projcal
