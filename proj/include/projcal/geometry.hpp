#pragma once

#include <Eigen/Core>

namespace projcal {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole intrinsics. Pixel (i, j) has its center at (u, v) = (i, j).
struct Intrinsics {
  double fx = 300.0;
  double fy = 300.0;
  double cx = 127.5;
  double cy = 127.5;
  int width = 256;
  int height = 256;

  /// Same device sampled on a width x height raster.
  Intrinsics scaled_to(int new_width, int new_height) const;

  /// Throws ConfigError unless fx, fy > 0 and the principal point is inside the raster.
  void validate(const char* field = "intrinsics") const;

  bool operator==(const Intrinsics&) const = default;
};

/// x -> rotation * x + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform inverse() const;

  /// Throws ConfigError when the rotation is not orthonormal with det +1.
  void validate(const char* field = "extrinsics") const;

  bool operator==(const RigidTransform&) const = default;
};

/// (a * b)(x) == a(b(x))
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) { return compose(a, b); }

struct Plane {
  Vec3 point = Vec3(0.0, 0.0, 1.0);
  Vec3 normal = Vec3(0.0, 0.0, -1.0);

  /// In-plane orthonormal axes (u, v), with u the camera x axis projected onto the plane.
  Vec3 axis_u() const;
  Vec3 axis_v() const;

  /// Plane coordinates of a point: ((p - point)·u, (p - point)·v).
  Vec2 to_local(const Vec3& p) const;
  Vec3 from_local(const Vec2& q) const;

  double signed_distance(const Vec3& p) const { return (p - point).dot(normal); }

  void validate(const char* field = "plane") const;

  bool operator==(const Plane&) const = default;
};

/// Error in the projector's x/y translation w.r.t. the camera, meters.
struct OffsetEstimate {
  double dx = 0.0;
  double dy = 0.0;

  double norm() const;
  OffsetEstimate operator-() const { return {-dx, -dy}; }
  OffsetEstimate operator+(const OffsetEstimate& o) const { return {dx + o.dx, dy + o.dy}; }
  OffsetEstimate operator*(double s) const { return {dx * s, dy * s}; }
  bool operator==(const OffsetEstimate&) const = default;
};

inline constexpr double kMinDepth = 1e-9;
inline constexpr double kParallelTolerance = 1e-12;

/// Pinhole projection of a world point into a device raster. Throws BehindDeviceError for z <= 1e-9.
Vec2 project_point(const Intrinsics& K, const RigidTransform& world_to_device, const Vec3& p_world);

/// Unit-norm ray direction, in the device frame, through a pixel.
Vec3 unproject_pixel(const Intrinsics& K, const Vec2& pixel);

/// Throws ParallelError when the ray runs along the plane and BehindOriginError when the hit is at s <= 0.
Vec3 intersect_ray_plane(const Vec3& origin, const Vec3& direction, const Plane& plane);

/// Adds the offset to the transform's translation x and y.
RigidTransform apply_offset(const RigidTransform& T, const OffsetEstimate& e);

/// x/y components of (a.translation - b.translation).
OffsetEstimate translation_offset(const RigidTransform& a, const RigidTransform& b);

Mat3 axis_angle(const Vec3& axis, double angle);

/// Device looking from `eye` toward `target` with image y axis close to `down`.
/// Returns the world-to-device transform.
RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& down = Vec3(0.0, 1.0, 0.0));

bool is_rotation(const Mat3& R, double tol = 1e-9);

}  // namespace projcal
