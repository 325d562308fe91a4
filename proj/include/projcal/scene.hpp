#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "projcal/geometry.hpp"
#include "projcal/image.hpp"

namespace projcal {

struct Resolution {
  int width = 256;
  int height = 256;
  bool operator==(const Resolution&) const = default;
};

/// Synthetic fiducial: a one-cell black border around an n x n binary pattern,
/// lying on the table plane and rotated by `yaw` about the plane normal.
struct TagSpec {
  Vec3 center = Vec3(0.0, 0.0, 1.0);
  double side = 0.10;
  int cells = 5;
  double yaw = 0.35;
  /// Row-major n x n, 1 = black. Must be symmetric under a 180 degree turn so
  /// the dark-pixel centroid sits on the tag center.
  std::vector<std::uint8_t> pattern = default_pattern(5);

  /// Dark field with a white center (one cell for odd n, 2 x 2 for even n).
  static std::vector<std::uint8_t> default_pattern(int n);

  /// In-plane tag axes (plane axes rotated by yaw).
  Vec3 axis_u(const Plane& plane) const;
  Vec3 axis_v(const Plane& plane) const;

  /// Corners in order (-,-), (+,-), (+,+), (-,+) along the tag axes.
  std::array<Vec3, 4> corners(const Plane& plane) const;

  bool operator==(const TagSpec&) const = default;
};

struct HighlightSpec {
  double side = 0.10;
  Rgb color{255, 0, 0};
  bool operator==(const HighlightSpec&) const = default;
};

inline constexpr double kHighlightAlpha = 0.6;

struct SceneConfig {
  Intrinsics camera{500.0, 500.0, 127.5, 127.5, 256, 256};
  Intrinsics projector{420.0, 420.0, 199.5, 149.5, 400, 300};
  RigidTransform true_extrinsics = default_extrinsics();
  Plane plane{};
  TagSpec tag{};
  HighlightSpec highlight{};
  Rgb background{160, 160, 160};

  /// Projector 0.2 m to the right of the camera, toed in toward the table center.
  static RigidTransform default_extrinsics();

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  SceneConfig with_tag_center(const Vec3& c) const;

  bool operator==(const SceneConfig&) const = default;
};

/// Highlight quad corners on the plane (camera frame), centered on the tag and aligned with its axes.
std::array<Vec3, 4> highlight_quad(const SceneConfig& cfg);

/// Projector raster positions of the highlight quad corners as computed from the believed extrinsics.
std::array<Vec2, 4> compute_highlight_projector_pixels(const SceneConfig& cfg, const RigidTransform& believed);

/// Where light leaving projector pixel `q` lands on the plane under the true extrinsics.
Vec3 land_projector_pixel(const SceneConfig& cfg, const Vec2& q);

/// Highlight quad as it physically lands on the plane.
std::array<Vec3, 4> landed_highlight_quad(const SceneConfig& cfg, const RigidTransform& believed);

/// Camera view of the tag and the projected highlight. Rows may be split over
/// `threads` workers; the output does not depend on the thread count.
Image render_scene(const SceneConfig& cfg, const RigidTransform& believed, Resolution res, int threads = 1);

/// Camera pixels of the eight landed cube vertices: base corners 0-3, then the top corners.
std::array<Vec2, 8> landed_cube_vertices(const SceneConfig& cfg, const RigidTransform& believed, double cube_side);

/// Camera-resolution image of the tag with the projected cube wireframe.
Image render_wireframe_cube(const SceneConfig& cfg, const RigidTransform& believed, double cube_side);

/// True when the tag and the highlight stay inside both rasters for every
/// offset in the box [-max_offset, max_offset]^2.
bool fits_frustum(const SceneConfig& cfg, double max_offset);

}  // namespace projcal
