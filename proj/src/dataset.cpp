#include "projcal/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "projcal/errors.hpp"
#include "projcal/serialization.hpp"

namespace projcal {

namespace {

constexpr std::uint64_t kSplitSalt = 0x5b117;

Image add_pixel_noise(Image img, double stddev, Rng& rng) {
  for (std::uint8_t& v : img.pixels) {
    const double noisy = std::round(static_cast<double>(v) + stddev * rng.normal());
    v = static_cast<std::uint8_t>(std::clamp(noisy, 0.0, 255.0));
  }
  return img;
}

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

}  // namespace

void GenConfig::validate() const {
  if (n_sequences < 2) throw ConfigError("gen.n_sequences: must be >= 2");
  if (steps_per_sequence < 1) throw ConfigError("gen.steps_per_sequence: must be >= 1");
  if (!(max_offset > 0.0)) throw ConfigError("gen.max_offset: must be > 0");
  if (!(decay > 0.0 && decay < 1.0)) throw ConfigError("gen.decay: must lie in (0, 1)");
  if (!(region.u_min <= region.u_max) || !(region.v_min <= region.v_max)) {
    throw ConfigError("gen.region: min bounds must not exceed max bounds");
  }
  if (resolution.width <= 0 || resolution.height <= 0) throw ConfigError("gen.resolution: must be positive");
  if (!(pixel_noise_stddev >= 0.0)) throw ConfigError("gen.pixel_noise_stddev: must be >= 0");
}

const SequenceRecord& DatasetManifest::sequence(int id) const {
  for (const SequenceRecord& s : sequences) {
    if (s.id == id) return s;
  }
  throw ConfigError("manifest: unknown sequence id " + std::to_string(id));
}

Vec3 sample_tag_center(const SceneConfig& scene, const GenConfig& gen, Rng& rng) {
  for (int attempt = 0; attempt < kMaxPlacementTries; ++attempt) {
    const double u = rng.uniform(gen.region.u_min, gen.region.u_max);
    const double v = rng.uniform(gen.region.v_min, gen.region.v_max);
    const Vec3 center = scene.plane.from_local(Vec2(u, v));
    if (fits_frustum(scene.with_tag_center(center), gen.max_offset)) return center;
  }
  throw PlacementError("could not place the tag inside the camera and projector frusta after " +
                       std::to_string(kMaxPlacementTries) + " tries");
}

OffsetEstimate sample_offset(double max_offset, Rng& rng) {
  const double dx = rng.uniform(-max_offset, max_offset);
  const double dy = rng.uniform(-max_offset, max_offset);
  return {dx, dy};
}

OffsetEstimate decayed_offset(const OffsetEstimate& e0, double decay, int k) {
  double scale = 1.0;
  for (int i = 0; i < k; ++i) scale *= decay;
  return e0 * scale;
}

std::string demonstration_image_path(int sequence_id, int step_index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "seq_%03d/step_%02d.ppm", sequence_id, step_index);
  return buf;
}

SequenceRecord generate_sequence(const SceneConfig& scene, const GenConfig& gen, int sequence_id,
                                 const std::filesystem::path& out_dir) {
  Rng rng = Rng::stream(gen.seed, static_cast<std::uint64_t>(sequence_id));
  SequenceRecord rec;
  rec.id = sequence_id;
  rec.tag_center = sample_tag_center(scene, gen, rng);
  const SceneConfig placed = scene.with_tag_center(rec.tag_center);
  const OffsetEstimate e0 = sample_offset(gen.max_offset, rng);

  std::error_code ec;
  std::filesystem::create_directories((out_dir / demonstration_image_path(sequence_id, 0)).parent_path(), ec);
  if (ec) throw IoError("cannot create directory under '" + out_dir.string() + "': " + ec.message());

  for (int k = 0; k < gen.steps_per_sequence; ++k) {
    const OffsetEstimate e = decayed_offset(e0, gen.decay, k);
    Image img = render_scene(placed, apply_offset(placed.true_extrinsics, e), gen.resolution);
    if (gen.pixel_noise_stddev > 0.0) img = add_pixel_noise(std::move(img), gen.pixel_noise_stddev, rng);
    Demonstration d;
    d.image = demonstration_image_path(sequence_id, k);
    d.offset = e;
    d.sequence_id = sequence_id;
    d.step_index = k;
    write_ppm(out_dir / d.image, img);
    rec.steps.push_back(std::move(d));
  }
  return rec;
}

DatasetSplit split_sequences(int n_sequences, std::uint64_t seed) {
  // ceil(0.7 n) in integer arithmetic; 0.7 * n in floating point overshoots for n = 100.
  const int n_train = (7 * n_sequences + 9) / 10;
  if (n_train >= n_sequences) {
    throw SplitError("a 70/30 split of " + std::to_string(n_sequences) +
                     " sequences leaves the test split empty; need n_sequences >= 4");
  }
  std::vector<int> ids(static_cast<std::size_t>(n_sequences));
  for (int i = 0; i < n_sequences; ++i) ids[static_cast<std::size_t>(i)] = i;
  Rng rng = Rng::stream(seed, 0, kSplitSalt);
  rng.shuffle(ids);
  DatasetSplit split;
  split.train.assign(ids.begin(), ids.begin() + n_train);
  split.test.assign(ids.begin() + n_train, ids.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

DatasetManifest generate_dataset(const SceneConfig& scene, const GenConfig& gen, const std::filesystem::path& out_dir,
                                 int threads) {
  scene.validate();
  gen.validate();
  DatasetManifest m;
  m.seed = gen.seed;
  m.scene = scene;
  m.gen = gen;
  m.split = split_sequences(gen.n_sequences, gen.seed);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  m.sequences.resize(static_cast<std::size_t>(gen.n_sequences));
  const int workers = std::clamp(threads, 1, gen.n_sequences);
  if (workers == 1) {
    for (int id = 0; id < gen.n_sequences; ++id) m.sequences[static_cast<std::size_t>(id)] = generate_sequence(scene, gen, id, out_dir);
  } else {
    std::mutex mu;
    std::exception_ptr failure;
    {
      std::vector<std::jthread> pool;
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (int id = w; id < gen.n_sequences; id += workers) {
            try {
              m.sequences[static_cast<std::size_t>(id)] = generate_sequence(scene, gen, id, out_dir);
            } catch (...) {
              std::lock_guard lock(mu);
              if (!failure) failure = std::current_exception();
              return;
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  write_manifest(out_dir / kManifestFileName, m);
  return m;
}

Image render_demonstration(const DatasetManifest& manifest, const SequenceRecord& seq, const Demonstration& demo) {
  const SceneConfig placed = manifest.scene.with_tag_center(seq.tag_center);
  return render_scene(placed, apply_offset(placed.true_extrinsics, demo.offset), manifest.gen.resolution);
}

std::string manifest_to_string(const DatasetManifest& m) {
  Json seqs = Json::array();
  for (const SequenceRecord& s : m.sequences) {
    Json steps = Json::array();
    for (const Demonstration& d : s.steps) {
      steps.push_back(Json{{"k", d.step_index}, {"offset", Json::array({d.offset.dx, d.offset.dy})}, {"image", d.image}});
    }
    seqs.push_back(Json{{"id", s.id}, {"tag_center", vec_json(s.tag_center)}, {"steps", steps}});
  }
  Json j{{"seed", m.seed},
         {"scene", to_json(m.scene)},
         {"gen", to_json(m.gen)},
         {"sequences", seqs},
         {"split", {{"train", m.split.train}, {"test", m.split.test}}}};
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_string(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw CorruptFileError(std::string("manifest: malformed JSON: ") + e.what());
  }
  DatasetManifest m;
  try {
    StrictObject o(j, "manifest");
    if (!o.has("seed")) throw ConfigError("manifest.seed: missing");
    m.seed = o.unsigned_integer("seed", 0);
    m.scene = scene_from_json(o.raw("scene"), SceneConfig{}, "manifest.scene");
    m.gen = gen_from_json(o.raw("gen"), GenConfig{}, "manifest.gen");
    const Json& seqs = o.raw("sequences");
    if (!seqs.is_array()) throw ConfigError("manifest.sequences: expected an array");
    for (const Json& sj : seqs) {
      StrictObject so(sj, "manifest.sequences[]");
      SequenceRecord s;
      s.id = so.integer("id", 0);
      s.tag_center = so.vec3("tag_center", Vec3::Zero());
      const Json& steps = so.raw("steps");
      if (!steps.is_array()) throw ConfigError("manifest.sequences[].steps: expected an array");
      for (const Json& dj : steps) {
        StrictObject d(dj, "manifest.sequences[].steps[]");
        Demonstration demo;
        demo.sequence_id = s.id;
        demo.step_index = d.integer("k", 0);
        const Json& off = d.raw("offset");
        if (!off.is_array() || off.size() != 2 || !off[0].is_number() || !off[1].is_number()) {
          throw ConfigError("manifest.sequences[].steps[].offset: expected [dx, dy]");
        }
        demo.offset = {off[0].get<double>(), off[1].get<double>()};
        demo.image = d.string("image", "");
        d.finish();
        s.steps.push_back(std::move(demo));
      }
      so.finish();
      m.sequences.push_back(std::move(s));
    }
    StrictObject split(o.raw("split"), "manifest.split");
    m.split.train = split.raw("train").get<std::vector<int>>();
    m.split.test = split.raw("test").get<std::vector<int>>();
    split.finish();
    o.finish();
  } catch (const ConfigError& e) {
    throw CorruptFileError(e.what());
  } catch (const Json::exception& e) {
    throw CorruptFileError(std::string("manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << manifest_to_string(manifest);
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return manifest_from_string(ss.str());
}

}  // namespace projcal
