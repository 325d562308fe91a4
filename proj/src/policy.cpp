#include "projcal/policy.hpp"

#include <algorithm>

#include "projcal/errors.hpp"

namespace projcal {

LearnedPolicy::LearnedPolicy(PolicyWeights weights) : weights_(std::move(weights)) { weights_.validate(); }

OffsetEstimate LearnedPolicy::estimate(const Image& image) const { return forward(weights_, preprocess(image)); }

RegionStats measure_regions(const Image& image) {
  RegionStats s;
  double tx = 0.0, ty = 0.0, hx = 0.0, hy = 0.0;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const Rgb c = image.at(x, y);
      const double luminance = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
      const double dominance = (static_cast<double>(c.r) - std::max(c.g, c.b)) / 255.0;
      // Dark tag cells stay dark under the red highlight, so they are counted either way.
      if (luminance < kDarkLuminance) {
        tx += x;
        ty += y;
        ++s.tag_pixels;
      }
      if (dominance > kRedDominance) {
        hx += x;
        hy += y;
        ++s.highlight_pixels;
      }
    }
  }
  if (s.tag_pixels > 0) s.tag_centroid = Vec2(tx, ty) / static_cast<double>(s.tag_pixels);
  if (s.highlight_pixels > 0) s.highlight_centroid = Vec2(hx, hy) / static_cast<double>(s.highlight_pixels);
  return s;
}

OffsetEstimate analytic_estimate(const Image& image, const Calibration& cal) {
  if (!image.valid()) throw NotFoundError("analytic estimate: invalid image");
  const RegionStats s = measure_regions(image);
  if (s.tag_pixels < kMinRegionPixels) {
    throw NotFoundError("analytic estimate: tag not found (" + std::to_string(s.tag_pixels) + " dark pixels)");
  }
  if (s.highlight_pixels < kMinRegionPixels) {
    throw NotFoundError("analytic estimate: highlight not found (" + std::to_string(s.highlight_pixels) + " red pixels)");
  }
  const Intrinsics K = cal.camera.scaled_to(image.width, image.height);
  const Vec3 tag = intersect_ray_plane(Vec3::Zero(), unproject_pixel(K, s.tag_centroid), cal.plane);
  const Vec3 highlight = intersect_ray_plane(Vec3::Zero(), unproject_pixel(K, s.highlight_centroid), cal.plane);
  const Vec3 d = highlight - tag;
  return {d.x(), d.y()};
}

}  // namespace projcal
