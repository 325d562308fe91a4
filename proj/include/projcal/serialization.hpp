#pragma once

#include <json.hpp>

#include "projcal/correction.hpp"
#include "projcal/dataset.hpp"
#include "projcal/scene.hpp"
#include "projcal/training.hpp"

namespace projcal {

using Json = nlohmann::ordered_json;

// Every *_from_json starts from `base` and overrides the keys present;
// unknown keys and ill-typed values raise ConfigError naming the field path.

Json to_json(const Intrinsics& K);
Json to_json(const RigidTransform& T);
Json to_json(const Plane& p);
Json to_json(const SceneConfig& cfg);
Json to_json(const GenConfig& cfg);
Json to_json(const TrainConfig& cfg);
Json to_json(const LoopConfig& cfg);

SceneConfig scene_from_json(const Json& j, SceneConfig base = {}, const std::string& path = "scene");
GenConfig gen_from_json(const Json& j, GenConfig base = {}, const std::string& path = "gen");
TrainConfig train_from_json(const Json& j, TrainConfig base = {}, const std::string& path = "train");
LoopConfig loop_from_json(const Json& j, LoopConfig base = {}, const std::string& path = "loop");

/// Reads a JSON object field by field and rejects keys nobody asked for.
class StrictObject {
 public:
  StrictObject(const Json& j, std::string path);

  bool has(const char* key) const;
  const Json& raw(const char* key);
  double number(const char* key, double fallback);
  int integer(const char* key, int fallback);
  std::uint64_t unsigned_integer(const char* key, std::uint64_t fallback);
  std::string string(const char* key, const std::string& fallback);
  Vec3 vec3(const char* key, const Vec3& fallback);
  std::string child_path(const char* key) const { return path_ + "." + key; }

  /// Throws ConfigError on the first key that was never read.
  void finish() const;

 private:
  const Json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

}  // namespace projcal
