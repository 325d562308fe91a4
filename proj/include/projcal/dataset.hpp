#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "projcal/geometry.hpp"
#include "projcal/rng.hpp"
#include "projcal/scene.hpp"

namespace projcal {

/// Tag placement bounds in plane coordinates (meters along the plane axes, relative to plane.point).
struct PlacementRegion {
  double u_min = -0.10;
  double u_max = 0.10;
  double v_min = -0.08;
  double v_max = 0.08;
  bool operator==(const PlacementRegion&) const = default;
};

struct GenConfig {
  int n_sequences = 100;
  int steps_per_sequence = 8;
  double max_offset = 0.05;
  double decay = 0.6;
  PlacementRegion region{};
  std::uint64_t seed = 20240;
  Resolution resolution{};
  double pixel_noise_stddev = 0.0;

  void validate() const;
  bool operator==(const GenConfig&) const = default;
};

/// One (image, offset label) pair.
struct Demonstration {
  std::string image;  // relative to the manifest directory
  OffsetEstimate offset;
  int sequence_id = 0;
  int step_index = 0;
  bool operator==(const Demonstration&) const = default;
};

struct SequenceRecord {
  int id = 0;
  Vec3 tag_center = Vec3::Zero();
  std::vector<Demonstration> steps;

  OffsetEstimate initial_offset() const { return steps.empty() ? OffsetEstimate{} : steps.front().offset; }
  bool operator==(const SequenceRecord&) const = default;
};

struct DatasetSplit {
  std::vector<int> train;
  std::vector<int> test;
  bool operator==(const DatasetSplit&) const = default;
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  SceneConfig scene{};
  GenConfig gen{};
  std::vector<SequenceRecord> sequences;
  DatasetSplit split;

  const SequenceRecord& sequence(int id) const;
  bool operator==(const DatasetManifest&) const = default;
};

inline constexpr int kMaxPlacementTries = 100;
inline constexpr const char* kManifestFileName = "manifest.json";

/// Uniform tag center in the region, resampled until the scene fits the frusta
/// for every offset up to max_offset. Throws PlacementError after 100 tries.
Vec3 sample_tag_center(const SceneConfig& scene, const GenConfig& gen, Rng& rng);

OffsetEstimate sample_offset(double max_offset, Rng& rng);

/// e0 * decay^k, by repeated multiplication.
OffsetEstimate decayed_offset(const OffsetEstimate& e0, double decay, int k);

/// Relative path of a demonstration image inside the dataset directory.
std::string demonstration_image_path(int sequence_id, int step_index);

/// Renders one decreasing-offset sequence and writes its images under out_dir.
SequenceRecord generate_sequence(const SceneConfig& scene, const GenConfig& gen, int sequence_id,
                                 const std::filesystem::path& out_dir);

/// Seeded shuffle, first ceil(0.7 n) ids to train. Throws SplitError when the test side is empty.
DatasetSplit split_sequences(int n_sequences, std::uint64_t seed);

/// Generates every sequence (optionally across threads) and writes out_dir/manifest.json.
DatasetManifest generate_dataset(const SceneConfig& scene, const GenConfig& gen, const std::filesystem::path& out_dir,
                                 int threads = 1);

/// Re-renders a demonstration from its stored label (noise-free).
Image render_demonstration(const DatasetManifest& manifest, const SequenceRecord& seq, const Demonstration& demo);

std::string manifest_to_string(const DatasetManifest& manifest);
DatasetManifest manifest_from_string(const std::string& text);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

}  // namespace projcal
