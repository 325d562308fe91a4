#include "projcal/serialization.hpp"

#include <algorithm>
#include <cmath>

#include "projcal/errors.hpp"

namespace projcal {

namespace {

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
Json rgb_json(const Rgb& c) { return Json::array({c.r, c.g, c.b}); }

Rgb rgb_from(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(path + ": expected [r, g, b]");
  Rgb c;
  std::uint8_t* dst[3] = {&c.r, &c.g, &c.b};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!j[i].is_number_integer() || j[i].get<int>() < 0 || j[i].get<int>() > 255) {
      throw ConfigError(path + ": channels must be integers in [0, 255]");
    }
    *dst[i] = static_cast<std::uint8_t>(j[i].get<int>());
  }
  return c;
}

Intrinsics intrinsics_from(const Json& j, Intrinsics base, const std::string& path) {
  StrictObject o(j, path);
  base.fx = o.number("fx", base.fx);
  base.fy = o.number("fy", base.fy);
  base.cx = o.number("cx", base.cx);
  base.cy = o.number("cy", base.cy);
  base.width = o.integer("width", base.width);
  base.height = o.integer("height", base.height);
  o.finish();
  return base;
}

RigidTransform transform_from(const Json& j, RigidTransform base, const std::string& path) {
  StrictObject o(j, path);
  if (o.has("rotation")) {
    const Json& r = o.raw("rotation");
    if (!r.is_array() || r.size() != 9) throw ConfigError(path + ".rotation: expected 9 row-major entries");
    for (int i = 0; i < 9; ++i) {
      if (!r[static_cast<std::size_t>(i)].is_number()) throw ConfigError(path + ".rotation: entries must be numbers");
      base.rotation(i / 3, i % 3) = r[static_cast<std::size_t>(i)].get<double>();
    }
  }
  base.translation = o.vec3("translation", base.translation);
  o.finish();
  return base;
}

}  // namespace

StrictObject::StrictObject(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
}

bool StrictObject::has(const char* key) const { return j_.contains(key); }

const Json& StrictObject::raw(const char* key) {
  seen_.emplace_back(key);
  return j_.at(key);
}

double StrictObject::number(const char* key, double fallback) {
  if (!has(key)) return fallback;
  const Json& v = raw(key);
  if (!v.is_number()) throw ConfigError(child_path(key) + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(child_path(key) + ": must be finite");
  return d;
}

int StrictObject::integer(const char* key, int fallback) {
  if (!has(key)) return fallback;
  const Json& v = raw(key);
  if (!v.is_number_integer()) throw ConfigError(child_path(key) + ": expected an integer");
  return v.get<int>();
}

std::uint64_t StrictObject::unsigned_integer(const char* key, std::uint64_t fallback) {
  if (!has(key)) return fallback;
  const Json& v = raw(key);
  if (!v.is_number_unsigned()) throw ConfigError(child_path(key) + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string StrictObject::string(const char* key, const std::string& fallback) {
  if (!has(key)) return fallback;
  const Json& v = raw(key);
  if (!v.is_string()) throw ConfigError(child_path(key) + ": expected a string");
  return v.get<std::string>();
}

Vec3 StrictObject::vec3(const char* key, const Vec3& fallback) {
  if (!has(key)) return fallback;
  const Json& v = raw(key);
  if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_number(); })) {
    throw ConfigError(child_path(key) + ": expected [x, y, z]");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

void StrictObject::finish() const {
  for (auto it = j_.begin(); it != j_.end(); ++it) {
    if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
      throw ConfigError(path_ + "." + it.key() + ": unknown key");
    }
  }
}

Json to_json(const Intrinsics& K) {
  return Json{{"fx", K.fx}, {"fy", K.fy}, {"cx", K.cx}, {"cy", K.cy}, {"width", K.width}, {"height", K.height}};
}

Json to_json(const RigidTransform& T) {
  Json rot = Json::array();
  for (int i = 0; i < 9; ++i) rot.push_back(T.rotation(i / 3, i % 3));
  return Json{{"rotation", rot}, {"translation", vec_json(T.translation)}};
}

Json to_json(const Plane& p) { return Json{{"point", vec_json(p.point)}, {"normal", vec_json(p.normal)}}; }

Json to_json(const SceneConfig& cfg) {
  Json pattern = Json::array();
  for (std::uint8_t b : cfg.tag.pattern) pattern.push_back(static_cast<int>(b));
  return Json{
      {"camera", to_json(cfg.camera)},
      {"projector", to_json(cfg.projector)},
      {"extrinsics", to_json(cfg.true_extrinsics)},
      {"plane", to_json(cfg.plane)},
      {"tag",
       {{"center", vec_json(cfg.tag.center)}, {"side", cfg.tag.side}, {"cells", cfg.tag.cells}, {"yaw", cfg.tag.yaw},
        {"pattern", pattern}}},
      {"highlight", {{"side", cfg.highlight.side}, {"color", rgb_json(cfg.highlight.color)}}},
      {"background", rgb_json(cfg.background)},
  };
}

Json to_json(const GenConfig& cfg) {
  return Json{
      {"n_sequences", cfg.n_sequences},
      {"steps_per_sequence", cfg.steps_per_sequence},
      {"max_offset", cfg.max_offset},
      {"decay", cfg.decay},
      {"region", {{"u_min", cfg.region.u_min}, {"u_max", cfg.region.u_max}, {"v_min", cfg.region.v_min}, {"v_max", cfg.region.v_max}}},
      {"seed", cfg.seed},
      {"resolution", Json::array({cfg.resolution.width, cfg.resolution.height})},
      {"pixel_noise_stddev", cfg.pixel_noise_stddev},
  };
}

Json to_json(const TrainConfig& cfg) {
  return Json{{"optimizer", to_string(cfg.optimizer)},
              {"learning_rate", cfg.learning_rate},
              {"momentum", cfg.momentum},
              {"batch_size", cfg.batch_size},
              {"epochs", cfg.epochs},
              {"seed", cfg.seed}};
}

Json to_json(const LoopConfig& cfg) {
  return Json{{"step_size", cfg.step_size},
              {"epsilon", cfg.epsilon},
              {"max_iterations", cfg.max_iterations},
              {"estimator", to_string(cfg.estimator)}};
}

SceneConfig scene_from_json(const Json& j, SceneConfig base, const std::string& path) {
  StrictObject o(j, path);
  if (o.has("camera")) base.camera = intrinsics_from(o.raw("camera"), base.camera, o.child_path("camera"));
  if (o.has("projector")) base.projector = intrinsics_from(o.raw("projector"), base.projector, o.child_path("projector"));
  if (o.has("extrinsics")) base.true_extrinsics = transform_from(o.raw("extrinsics"), base.true_extrinsics, o.child_path("extrinsics"));
  if (o.has("plane")) {
    StrictObject p(o.raw("plane"), o.child_path("plane"));
    base.plane.point = p.vec3("point", base.plane.point);
    base.plane.normal = p.vec3("normal", base.plane.normal);
    p.finish();
  }
  if (o.has("tag")) {
    StrictObject t(o.raw("tag"), o.child_path("tag"));
    base.tag.center = t.vec3("center", base.tag.center);
    base.tag.side = t.number("side", base.tag.side);
    const int cells = t.integer("cells", base.tag.cells);
    base.tag.yaw = t.number("yaw", base.tag.yaw);
    if (t.has("pattern")) {
      const Json& pat = t.raw("pattern");
      if (!pat.is_array()) throw ConfigError(t.child_path("pattern") + ": expected an array of 0/1");
      base.tag.pattern.clear();
      for (const Json& b : pat) {
        if (!b.is_number_integer()) throw ConfigError(t.child_path("pattern") + ": entries must be 0 or 1");
        base.tag.pattern.push_back(static_cast<std::uint8_t>(b.get<int>()));
      }
    } else if (cells != base.tag.cells && cells >= 1) {
      base.tag.pattern = TagSpec::default_pattern(cells);
    }
    base.tag.cells = cells;
    t.finish();
  }
  if (o.has("highlight")) {
    StrictObject h(o.raw("highlight"), o.child_path("highlight"));
    base.highlight.side = h.number("side", base.highlight.side);
    if (h.has("color")) base.highlight.color = rgb_from(h.raw("color"), h.child_path("color"));
    h.finish();
  }
  if (o.has("background")) base.background = rgb_from(o.raw("background"), o.child_path("background"));
  o.finish();
  return base;
}

GenConfig gen_from_json(const Json& j, GenConfig base, const std::string& path) {
  StrictObject o(j, path);
  base.n_sequences = o.integer("n_sequences", base.n_sequences);
  base.steps_per_sequence = o.integer("steps_per_sequence", base.steps_per_sequence);
  base.max_offset = o.number("max_offset", base.max_offset);
  base.decay = o.number("decay", base.decay);
  if (o.has("region")) {
    StrictObject r(o.raw("region"), o.child_path("region"));
    base.region.u_min = r.number("u_min", base.region.u_min);
    base.region.u_max = r.number("u_max", base.region.u_max);
    base.region.v_min = r.number("v_min", base.region.v_min);
    base.region.v_max = r.number("v_max", base.region.v_max);
    r.finish();
  }
  base.seed = o.unsigned_integer("seed", base.seed);
  if (o.has("resolution")) {
    const Json& r = o.raw("resolution");
    if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer()) {
      throw ConfigError(o.child_path("resolution") + ": expected [width, height]");
    }
    base.resolution = {r[0].get<int>(), r[1].get<int>()};
  }
  base.pixel_noise_stddev = o.number("pixel_noise_stddev", base.pixel_noise_stddev);
  o.finish();
  return base;
}

TrainConfig train_from_json(const Json& j, TrainConfig base, const std::string& path) {
  StrictObject o(j, path);
  if (o.has("optimizer")) base.optimizer = optimizer_from_string(o.string("optimizer", ""));
  base.learning_rate = o.number("learning_rate", base.learning_rate);
  base.momentum = o.number("momentum", base.momentum);
  base.batch_size = o.integer("batch_size", base.batch_size);
  base.epochs = o.integer("epochs", base.epochs);
  base.seed = o.unsigned_integer("seed", base.seed);
  o.finish();
  return base;
}

LoopConfig loop_from_json(const Json& j, LoopConfig base, const std::string& path) {
  StrictObject o(j, path);
  base.step_size = o.number("step_size", base.step_size);
  base.epsilon = o.number("epsilon", base.epsilon);
  base.max_iterations = o.integer("max_iterations", base.max_iterations);
  if (o.has("estimator")) {
    try {
      base.estimator = estimator_from_string(o.string("estimator", ""));
    } catch (const ConfigError&) {
      throw ConfigError(o.child_path("estimator") + ": expected \"learned\" or \"analytic\"");
    }
  }
  o.finish();
  return base;
}

}  // namespace projcal
