#include <doctest.h>

#include <cmath>

#include "projcal/errors.hpp"
#include "projcal/geometry.hpp"
#include "projcal/rng.hpp"

using namespace projcal;

namespace {

Intrinsics k100() { return Intrinsics{100.0, 100.0, 50.0, 50.0, 100, 100}; }

RigidTransform random_transform(Rng& rng) {
  const Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  RigidTransform T;
  T.rotation = axis_angle(axis.normalized(), rng.uniform(-3.0, 3.0));
  T.translation = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  return T;
}

double max_abs_diff(const RigidTransform& a, const RigidTransform& b) {
  return std::max((a.rotation - b.rotation).cwiseAbs().maxCoeff(),
                  (a.translation - b.translation).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("project_point examples") {
  const Intrinsics K = k100();
  const Vec2 a = project_point(K, RigidTransform::identity(), Vec3(0, 0, 1));
  CHECK(a.x() == 50.0);
  CHECK(a.y() == 50.0);
  const Vec2 b = project_point(K, RigidTransform::identity(), Vec3(0.1, 0, 1));
  CHECK(std::abs(b.x() - 60.0) < 1e-12);
  CHECK(std::abs(b.y() - 50.0) < 1e-12);
  CHECK_THROWS_AS(project_point(K, RigidTransform::identity(), Vec3(0, 0, -1)), BehindDeviceError);
  CHECK_THROWS_AS(project_point(K, RigidTransform::identity(), Vec3(0.3, 0, 0)), BehindDeviceError);
}

TEST_CASE("unproject_pixel examples") {
  const Intrinsics K = k100();
  const Vec3 a = unproject_pixel(K, Vec2(50, 50));
  CHECK((a - Vec3(0, 0, 1)).norm() < 1e-15);
  const Vec3 b = unproject_pixel(K, Vec2(60, 50));
  CHECK((b - Vec3(0.1, 0, 1).normalized()).norm() < 1e-15);
  CHECK(std::abs(b.norm() - 1.0) < 1e-15);
}

TEST_CASE("projection round trip over raster and depth") {
  Rng rng(11);
  Intrinsics K{420.0, 410.0, 199.5, 149.5, 400, 300};
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const Vec2 q(rng.uniform(0, K.width - 1), rng.uniform(0, K.height - 1));
    const double lambda = rng.uniform(0.5, 5.0);
    const Vec2 back = project_point(K, RigidTransform::identity(), lambda * unproject_pixel(K, q));
    worst = std::max(worst, (back - q).norm());
  }
  CHECK(worst < 1e-9);
  const Vec2 q(17.25, 80.5);
  CHECK((project_point(k100(), RigidTransform::identity(), 2.5 * unproject_pixel(k100(), q)) - q).norm() < 1e-9);
}

TEST_CASE("intersect_ray_plane examples") {
  const Plane table;
  CHECK((intersect_ray_plane(Vec3::Zero(), Vec3(0, 0, 1), table) - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK((intersect_ray_plane(Vec3::Zero(), Vec3(0.1, 0, 1).normalized(), table) - Vec3(0.1, 0, 1)).norm() < 1e-12);
  CHECK_THROWS_AS(intersect_ray_plane(Vec3::Zero(), Vec3(1, 0, 0), table), ParallelError);
  CHECK_THROWS_AS(intersect_ray_plane(Vec3::Zero(), Vec3(0, 0, -1), table), BehindOriginError);
}

TEST_CASE("intersections lie on the plane") {
  Rng rng(12);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    Plane p;
    p.normal = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    p.point = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Vec3 origin(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    Vec3 dir = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    // point toward the plane
    if ((p.point - origin).dot(p.normal) * dir.dot(p.normal) < 0) dir = -dir;
    if (std::abs(dir.dot(p.normal)) < 1e-3) continue;
    worst = std::max(worst, std::abs(p.signed_distance(intersect_ray_plane(origin, dir, p))));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("apply_offset examples and additivity") {
  RigidTransform T;
  T.translation = Vec3(0.2, 0, 0);
  CHECK(apply_offset(T, {0, 0}) == T);
  const RigidTransform U = apply_offset(T, {0.03, -0.02});
  CHECK(std::abs(U.translation.x() - 0.23) < 1e-15);
  CHECK(std::abs(U.translation.y() + 0.02) < 1e-15);
  CHECK(U.translation.z() == 0.0);
  CHECK(U.rotation == T.rotation);
  CHECK(max_abs_diff(apply_offset(U, -OffsetEstimate{0.03, -0.02}), T) < 1e-12);

  Rng rng(13);
  for (int i = 0; i < 500; ++i) {
    const RigidTransform R = random_transform(rng);
    const OffsetEstimate e1{rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)};
    const OffsetEstimate e2{rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)};
    CHECK(max_abs_diff(apply_offset(R, e1 + e2), apply_offset(apply_offset(R, e1), e2)) < 1e-15);
  }
}

TEST_CASE("rigid transform identities") {
  Rng rng(14);
  double worst_inverse = 0.0, worst_assoc = 0.0, worst_identity = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const RigidTransform a = random_transform(rng), b = random_transform(rng), c = random_transform(rng);
    worst_inverse = std::max(worst_inverse, max_abs_diff(a * a.inverse(), RigidTransform::identity()));
    worst_inverse = std::max(worst_inverse, max_abs_diff(a.inverse() * a, RigidTransform::identity()));
    worst_assoc = std::max(worst_assoc, max_abs_diff((a * b) * c, a * (b * c)));
    worst_identity = std::max(worst_identity, max_abs_diff(a * RigidTransform::identity(), a));
    const Vec3 p(rng.normal(), rng.normal(), rng.normal());
    CHECK(((a * b).apply(p) - a.apply(b.apply(p))).norm() < 1e-12);
    CHECK(is_rotation(a.rotation));
  }
  CHECK(worst_inverse < 1e-9);
  CHECK(worst_assoc < 1e-9);
  CHECK(worst_identity < 1e-15);
}

TEST_CASE("look_at points the optical axis at the target") {
  const RigidTransform T = look_at(Vec3(0.2, 0, 0), Vec3(0, 0, 1));
  CHECK(is_rotation(T.rotation));
  const Vec3 t = T.apply(Vec3(0, 0, 1));
  CHECK(std::abs(t.x()) < 1e-12);
  CHECK(std::abs(t.y()) < 1e-12);
  CHECK(t.z() > 0);
  CHECK(T.apply(Vec3(0.2, 0, 0)).norm() < 1e-12);
}

TEST_CASE("validation rejects bad values") {
  Intrinsics K = k100();
  K.fx = 0;
  CHECK_THROWS_AS(K.validate(), ConfigError);
  K = k100();
  K.cx = 100;
  CHECK_THROWS_AS(K.validate(), ConfigError);
  RigidTransform T;
  T.rotation(0, 0) = 2.0;
  CHECK_THROWS_AS(T.validate(), ConfigError);
  Plane p;
  p.normal = Vec3(0, 0, 2);
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("plane local coordinates round trip") {
  const Plane p;
  const Vec3 q = p.from_local(Vec2(0.03, -0.07));
  CHECK(std::abs(p.signed_distance(q)) < 1e-15);
  CHECK((p.to_local(q) - Vec2(0.03, -0.07)).norm() < 1e-15);
  CHECK(std::abs(p.axis_u().dot(p.axis_v())) < 1e-15);
}
