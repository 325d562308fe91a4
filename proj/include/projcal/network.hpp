#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "projcal/geometry.hpp"
#include "projcal/image.hpp"

namespace projcal {

inline constexpr int kInputChannels = 2;
inline constexpr int kInputSize = 64;
inline constexpr std::size_t kInputLength = static_cast<std::size_t>(kInputChannels) * kInputSize * kInputSize;

/// Network input, channel-major [2][64][64]: red dominance, then luminance.
struct InputTensor {
  std::vector<float> data = std::vector<float>(kInputLength, 0.0f);

  float at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * kInputSize + y) * kInputSize + x]; }
  bool operator==(const InputTensor&) const = default;
};

/// Area-averages red dominance max(0, r - max(g, b)) / 255 and luminance
/// (0.299 r + 0.587 g + 0.114 b) / 255 onto a 64 x 64 grid.
InputTensor preprocess(const Image& image);

struct Tensor {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::vector<float> values;

  std::size_t element_count() const;
};

struct TensorSpec {
  const char* name;
  std::vector<std::uint32_t> shape;
};

/// Fixed graph: three 3x3 stride-2 conv+ReLU layers (2->16->32->64 channels),
/// global average pool, then a linear 64->2 head producing (dx, dy) in meters.
const std::vector<TensorSpec>& architecture();

/// Named tensors in architecture() order.
struct PolicyWeights {
  std::vector<Tensor> tensors;

  static PolicyWeights zeros();
  /// Normal(0, sqrt(2 / fan_in)) kernels, zero biases.
  static PolicyWeights he_init(std::uint64_t seed);

  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);

  /// Throws ShapeMismatchError unless names and shapes match architecture().
  void validate() const;
  bool all_finite() const;
  std::size_t parameter_count() const;
};

/// Byte-for-byte comparison of names, shapes and float bit patterns.
bool bitwise_equal(const PolicyWeights& a, const PolicyWeights& b);

OffsetEstimate forward(const PolicyWeights& weights, const InputTensor& input);

struct Gradients {
  double loss = 0.0;
  PolicyWeights grads;
};

/// loss = 0.5 * |prediction - target|^2 with gradients for every tensor.
Gradients backward(const PolicyWeights& weights, const InputTensor& input, const OffsetEstimate& target);

/// Batch mean of the per-sample losses and gradients, summed in sample order.
Gradients backward_batch(const PolicyWeights& weights, std::span<const InputTensor* const> inputs,
                         std::span<const OffsetEstimate> targets);

/// Weights file: "PCALW001", u32 count, then per tensor u32 name length, name,
/// u32 rank, u32 dims, f32 values; all little-endian.
std::string encode_weights(const PolicyWeights& weights);
PolicyWeights decode_weights(const std::string& bytes);
void save_weights(const std::filesystem::path& path, const PolicyWeights& weights);
PolicyWeights load_weights(const std::filesystem::path& path);

}  // namespace projcal
