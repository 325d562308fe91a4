#include "projcal/geometry.hpp"

#include <cmath>
#include <string>

#include <Eigen/Geometry>

#include "projcal/errors.hpp"

namespace projcal {

namespace {

std::string field_msg(const char* field, const std::string& what) { return std::string(field) + ": " + what; }

}  // namespace

Intrinsics Intrinsics::scaled_to(int new_width, int new_height) const {
  if (new_width <= 0 || new_height <= 0) {
    throw ConfigError("resolution: width and height must be positive");
  }
  const double sx = static_cast<double>(new_width) / width;
  const double sy = static_cast<double>(new_height) / height;
  Intrinsics out;
  out.fx = fx * sx;
  out.fy = fy * sy;
  // Pixel centers sit at integer coordinates, so pixel edges are at -0.5.
  out.cx = (cx + 0.5) * sx - 0.5;
  out.cy = (cy + 0.5) * sy - 0.5;
  out.width = new_width;
  out.height = new_height;
  return out;
}

void Intrinsics::validate(const char* field) const {
  if (!(fx > 0.0) || !std::isfinite(fx)) throw ConfigError(field_msg(field, "fx must be > 0"));
  if (!(fy > 0.0) || !std::isfinite(fy)) throw ConfigError(field_msg(field, "fy must be > 0"));
  if (width <= 0 || height <= 0) throw ConfigError(field_msg(field, "width and height must be positive"));
  if (!(cx >= 0.0 && cx < width)) throw ConfigError(field_msg(field, "cx must lie in [0, width)"));
  if (!(cy >= 0.0 && cy < height)) throw ConfigError(field_msg(field, "cy must lie in [0, height)"));
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

void RigidTransform::validate(const char* field) const {
  if (!rotation.allFinite() || !translation.allFinite()) throw ConfigError(field_msg(field, "non-finite entries"));
  if (!is_rotation(rotation)) throw ConfigError(field_msg(field, "rotation must be orthonormal with det = 1"));
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Vec3 Plane::axis_u() const {
  Vec3 u = Vec3::UnitX() - Vec3::UnitX().dot(normal) * normal;
  if (u.norm() < 1e-6) u = Vec3::UnitY() - Vec3::UnitY().dot(normal) * normal;
  return u.normalized();
}

Vec3 Plane::axis_v() const { return axis_u().cross(normal); }

Vec2 Plane::to_local(const Vec3& p) const {
  const Vec3 d = p - point;
  return {d.dot(axis_u()), d.dot(axis_v())};
}

Vec3 Plane::from_local(const Vec2& q) const { return point + q.x() * axis_u() + q.y() * axis_v(); }

void Plane::validate(const char* field) const {
  if (!point.allFinite() || !normal.allFinite()) throw ConfigError(field_msg(field, "non-finite entries"));
  if (std::abs(normal.norm() - 1.0) > 1e-9) throw ConfigError(field_msg(field, "normal must have unit length"));
}

double OffsetEstimate::norm() const { return std::hypot(dx, dy); }

Vec2 project_point(const Intrinsics& K, const RigidTransform& world_to_device, const Vec3& p_world) {
  const Vec3 p = world_to_device.apply(p_world);
  if (p.z() <= kMinDepth) {
    throw BehindDeviceError("point at or behind the device optical center (z = " + std::to_string(p.z()) + ")");
  }
  return {K.fx * p.x() / p.z() + K.cx, K.fy * p.y() / p.z() + K.cy};
}

Vec3 unproject_pixel(const Intrinsics& K, const Vec2& pixel) {
  return Vec3((pixel.x() - K.cx) / K.fx, (pixel.y() - K.cy) / K.fy, 1.0).normalized();
}

Vec3 intersect_ray_plane(const Vec3& origin, const Vec3& direction, const Plane& plane) {
  const double denom = direction.dot(plane.normal);
  if (std::abs(denom) < kParallelTolerance) throw ParallelError("ray is parallel to the plane");
  const double s = (plane.point - origin).dot(plane.normal) / denom;
  if (s <= 0.0) throw BehindOriginError("plane intersection lies behind the ray origin");
  return origin + s * direction;
}

RigidTransform apply_offset(const RigidTransform& T, const OffsetEstimate& e) {
  RigidTransform out = T;
  out.translation.x() += e.dx;
  out.translation.y() += e.dy;
  return out;
}

OffsetEstimate translation_offset(const RigidTransform& a, const RigidTransform& b) {
  return {a.translation.x() - b.translation.x(), a.translation.y() - b.translation.y()};
}

Mat3 axis_angle(const Vec3& axis, double angle) { return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(); }

RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& down) {
  const Vec3 z = (target - eye).normalized();
  const Vec3 x = down.cross(z).normalized();
  const Vec3 y = z.cross(x);
  RigidTransform T;
  T.rotation.row(0) = x.transpose();
  T.rotation.row(1) = y.transpose();
  T.rotation.row(2) = z.transpose();
  T.translation = -(T.rotation * eye);
  return T;
}

bool is_rotation(const Mat3& R, double tol) {
  if (!R.allFinite()) return false;
  if (((R.transpose() * R) - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(R.determinant() - 1.0) <= tol;
}

}  // namespace projcal
