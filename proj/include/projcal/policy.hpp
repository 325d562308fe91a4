#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "projcal/geometry.hpp"
#include "projcal/image.hpp"
#include "projcal/network.hpp"

namespace projcal {

/// Maps a camera image to an estimate of the extrinsic offset.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual OffsetEstimate estimate(const Image& image) const = 0;
  virtual std::string name() const = 0;
};

class LearnedPolicy final : public Policy {
 public:
  explicit LearnedPolicy(PolicyWeights weights);
  OffsetEstimate estimate(const Image& image) const override;
  std::string name() const override { return "learned"; }
  const PolicyWeights& weights() const { return weights_; }

 private:
  PolicyWeights weights_;
};

/// What the analytic estimator needs to know about the rig.
struct Calibration {
  Intrinsics camera;
  Plane plane;
};

inline constexpr double kDarkLuminance = 60.0;
inline constexpr double kRedDominance = 0.3;
inline constexpr std::size_t kMinRegionPixels = 20;

struct RegionStats {
  Vec2 tag_centroid = Vec2::Zero();
  std::size_t tag_pixels = 0;
  Vec2 highlight_centroid = Vec2::Zero();
  std::size_t highlight_pixels = 0;
};

/// Pixel centroids of the dark tag cells (luminance < 60, with or without
/// highlight on top) and of the red-dominant highlight (dominance > 0.3).
RegionStats measure_regions(const Image& image);

/// Plane displacement (highlight - tag) between the two centroids, back-projected
/// through the camera. Throws NotFoundError when either region has < 20 pixels.
OffsetEstimate analytic_estimate(const Image& image, const Calibration& cal);

class AnalyticPolicy final : public Policy {
 public:
  explicit AnalyticPolicy(Calibration cal) : cal_(std::move(cal)) {}
  OffsetEstimate estimate(const Image& image) const override { return analytic_estimate(image, cal_); }
  std::string name() const override { return "analytic"; }

 private:
  Calibration cal_;
};

/// Wraps an arbitrary callable; handy for scripted or degenerate policies.
class FunctionPolicy final : public Policy {
 public:
  using Fn = std::function<OffsetEstimate(const Image&)>;
  FunctionPolicy(Fn fn, std::string name = "function") : fn_(std::move(fn)), name_(std::move(name)) {}
  OffsetEstimate estimate(const Image& image) const override { return fn_(image); }
  std::string name() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

}  // namespace projcal
