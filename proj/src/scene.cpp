#include "projcal/scene.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <thread>

#include "projcal/errors.hpp"

namespace projcal {

std::vector<std::uint8_t> TagSpec::default_pattern(int n) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n) * n, 1);
  const int lo = (n - 1) / 2;
  const int hi = n / 2;
  for (int r = lo; r <= hi; ++r) {
    for (int c = lo; c <= hi; ++c) bits[static_cast<std::size_t>(r) * n + c] = 0;
  }
  return bits;
}

Vec3 TagSpec::axis_u(const Plane& plane) const {
  return std::cos(yaw) * plane.axis_u() + std::sin(yaw) * plane.axis_v();
}

Vec3 TagSpec::axis_v(const Plane& plane) const {
  return -std::sin(yaw) * plane.axis_u() + std::cos(yaw) * plane.axis_v();
}

std::array<Vec3, 4> TagSpec::corners(const Plane& plane) const {
  const Vec3 a = 0.5 * side * axis_u(plane);
  const Vec3 b = 0.5 * side * axis_v(plane);
  return {center - a - b, center + a - b, center + a + b, center - a + b};
}

RigidTransform SceneConfig::default_extrinsics() {
  return look_at(Vec3(0.2, 0.0, 0.0), Vec3(0.0, 0.0, 1.0));
}

void SceneConfig::validate() const {
  camera.validate("scene.camera");
  projector.validate("scene.projector");
  true_extrinsics.validate("scene.extrinsics");
  plane.validate("scene.plane");
  if (!(tag.side > 0.0)) throw ConfigError("scene.tag.side: must be > 0");
  if (tag.cells < 4) throw ConfigError("scene.tag.cells: must be >= 4");
  if (!std::isfinite(tag.yaw)) throw ConfigError("scene.tag.yaw: must be finite");
  const std::size_t n = static_cast<std::size_t>(tag.cells);
  if (tag.pattern.size() != n * n) throw ConfigError("scene.tag.pattern: must hold cells x cells entries");
  for (std::size_t k = 0; k < tag.pattern.size(); ++k) {
    if (tag.pattern[k] > 1) throw ConfigError("scene.tag.pattern: entries must be 0 or 1");
    if (tag.pattern[k] != tag.pattern[tag.pattern.size() - 1 - k]) {
      throw ConfigError("scene.tag.pattern: must be symmetric under a 180 degree rotation");
    }
  }
  if (std::abs(plane.signed_distance(tag.center)) > 1e-9) throw ConfigError("scene.tag.center: must lie on the plane");
  if (!(highlight.side > 0.0)) throw ConfigError("scene.highlight.side: must be > 0");
  for (const Vec3& c : tag.corners(plane)) {
    Vec2 px;
    try {
      px = project_point(camera, RigidTransform::identity(), c);
    } catch (const BehindDeviceError&) {
      throw ConfigError("scene.tag: corner behind the camera");
    }
    if (px.x() < -0.5 || px.y() < -0.5 || px.x() > camera.width - 0.5 || px.y() > camera.height - 0.5) {
      throw ConfigError("scene.tag: corner outside the camera frustum");
    }
  }
}

SceneConfig SceneConfig::with_tag_center(const Vec3& c) const {
  SceneConfig out = *this;
  out.tag.center = c;
  return out;
}

std::array<Vec3, 4> highlight_quad(const SceneConfig& cfg) {
  TagSpec sized = cfg.tag;
  sized.side = cfg.highlight.side;
  return sized.corners(cfg.plane);
}

std::array<Vec2, 4> compute_highlight_projector_pixels(const SceneConfig& cfg, const RigidTransform& believed) {
  std::array<Vec2, 4> out;
  const auto quad = highlight_quad(cfg);
  for (std::size_t i = 0; i < 4; ++i) out[i] = project_point(cfg.projector, believed, quad[i]);
  return out;
}

Vec3 land_projector_pixel(const SceneConfig& cfg, const Vec2& q) {
  const RigidTransform device_to_camera = cfg.true_extrinsics.inverse();
  const Vec3 dir = device_to_camera.rotation * unproject_pixel(cfg.projector, q);
  return intersect_ray_plane(device_to_camera.translation, dir, cfg.plane);
}

std::array<Vec3, 4> landed_highlight_quad(const SceneConfig& cfg, const RigidTransform& believed) {
  const auto pixels = compute_highlight_projector_pixels(cfg, believed);
  std::array<Vec3, 4> out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = land_projector_pixel(cfg, pixels[i]);
  return out;
}

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool inside_convex(const std::array<Vec2, 4>& quad, const Vec2& p) {
  bool any_pos = false;
  bool any_neg = false;
  for (std::size_t i = 0; i < 4; ++i) {
    const double c = cross2(quad[(i + 1) % 4] - quad[i], p - quad[i]);
    any_pos |= c > 0.0;
    any_neg |= c < 0.0;
  }
  return !(any_pos && any_neg);
}

std::uint8_t blend(std::uint8_t top, std::uint8_t base) {
  // alpha = 0.6 in exact integer arithmetic
  return static_cast<std::uint8_t>((6 * top + 4 * base + 5) / 10);
}

/// Per-pixel scene evaluation in plane-local coordinates.
class SceneSampler {
 public:
  SceneSampler(const SceneConfig& cfg, const std::array<Vec3, 4>* landed, Resolution res)
      : cfg_(cfg), K_(cfg.camera.scaled_to(res.width, res.height)) {
    tag_center_ = cfg.plane.to_local(cfg.tag.center);
    tag_u_ = Vec2(std::cos(cfg.tag.yaw), std::sin(cfg.tag.yaw));
    tag_v_ = Vec2(-std::sin(cfg.tag.yaw), std::cos(cfg.tag.yaw));
    grid_ = cfg.tag.cells + 2;
    cell_ = cfg.tag.side / grid_;
    if (landed != nullptr) {
      has_highlight_ = true;
      for (std::size_t i = 0; i < 4; ++i) quad_[i] = cfg.plane.to_local((*landed)[i]);
    }
  }

  Rgb shade(int x, int y) const {
    Vec3 hit;
    try {
      hit = intersect_ray_plane(Vec3::Zero(), unproject_pixel(K_, Vec2(x, y)), cfg_.plane);
    } catch (const Error&) {
      return cfg_.background;
    }
    const Vec2 p = cfg_.plane.to_local(hit);
    Rgb base = cfg_.background;
    if (auto tag = tag_color(p)) base = *tag;
    if (has_highlight_ && inside_convex(quad_, p)) {
      const Rgb& h = cfg_.highlight.color;
      return {blend(h.r, base.r), blend(h.g, base.g), blend(h.b, base.b)};
    }
    return base;
  }

  const Intrinsics& intrinsics() const { return K_; }

 private:
  std::optional<Rgb> tag_color(const Vec2& p) const {
    const Vec2 d = p - tag_center_;
    const double half = 0.5 * cfg_.tag.side;
    const double a = d.dot(tag_u_) + half;
    const double b = d.dot(tag_v_) + half;
    if (a < 0.0 || b < 0.0 || a >= cfg_.tag.side || b >= cfg_.tag.side) return std::nullopt;
    const int i = std::min(static_cast<int>(a / cell_), grid_ - 1);
    const int j = std::min(static_cast<int>(b / cell_), grid_ - 1);
    constexpr Rgb kBlack{0, 0, 0};
    constexpr Rgb kWhite{255, 255, 255};
    if (i == 0 || j == 0 || i == grid_ - 1 || j == grid_ - 1) return kBlack;
    const int n = cfg_.tag.cells;
    return cfg_.tag.pattern[static_cast<std::size_t>(j - 1) * n + (i - 1)] ? kBlack : kWhite;
  }

  const SceneConfig& cfg_;
  Intrinsics K_;
  Vec2 tag_center_;
  Vec2 tag_u_;
  Vec2 tag_v_;
  int grid_ = 0;
  double cell_ = 0.0;
  bool has_highlight_ = false;
  std::array<Vec2, 4> quad_;
};

Image rasterize(const SceneSampler& sampler, Resolution res, Rgb fill, int threads) {
  Image img(res.width, res.height, fill);
  auto rows = [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < res.width; ++x) img.set(x, y, sampler.shade(x, y));
    }
  };
  const int workers = std::clamp(threads, 1, res.height);
  if (workers == 1) {
    rows(0, res.height);
    return img;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      const int y0 = res.height * w / workers;
      const int y1 = res.height * (w + 1) / workers;
      pool.emplace_back(rows, y0, y1);
    }
  }
  return img;
}

void draw_line(Image& img, const Vec2& a, const Vec2& b, Rgb color) {
  const Vec2 d = b - a;
  const int steps = static_cast<int>(std::ceil(std::max(std::abs(d.x()), std::abs(d.y()))));
  for (int i = 0; i <= steps; ++i) {
    const double t = steps == 0 ? 0.0 : static_cast<double>(i) / steps;
    const Vec2 p = a + t * d;
    const int x = static_cast<int>(std::floor(p.x() + 0.5));
    const int y = static_cast<int>(std::floor(p.y() + 0.5));
    if (x >= 0 && y >= 0 && x < img.width && y < img.height) img.set(x, y, color);
  }
}

bool in_raster(const Intrinsics& K, const Vec2& px) {
  return px.x() >= -0.5 && px.y() >= -0.5 && px.x() <= K.width - 0.5 && px.y() <= K.height - 0.5;
}

}  // namespace

Image render_scene(const SceneConfig& cfg, const RigidTransform& believed, Resolution res, int threads) {
  if (res.width <= 0 || res.height <= 0) throw ConfigError("resolution: width and height must be positive");
  const auto landed = landed_highlight_quad(cfg, believed);
  const SceneSampler sampler(cfg, &landed, res);
  return rasterize(sampler, res, cfg.background, threads);
}

std::array<Vec2, 8> landed_cube_vertices(const SceneConfig& cfg, const RigidTransform& believed, double cube_side) {
  TagSpec base = cfg.tag;
  base.side = cube_side;
  const auto corners = base.corners(cfg.plane);
  // "Up" is the side of the plane that holds the camera.
  const Vec3 up = cfg.plane.signed_distance(Vec3::Zero()) > 0.0 ? cfg.plane.normal : Vec3(-cfg.plane.normal);
  std::array<Vec2, 8> out;
  for (std::size_t i = 0; i < 8; ++i) {
    const Vec3 vertex = i < 4 ? corners[i] : Vec3(corners[i - 4] + cube_side * up);
    const Vec2 q = project_point(cfg.projector, believed, vertex);
    out[i] = project_point(cfg.camera, RigidTransform::identity(), land_projector_pixel(cfg, q));
  }
  return out;
}

Image render_wireframe_cube(const SceneConfig& cfg, const RigidTransform& believed, double cube_side) {
  const auto v = landed_cube_vertices(cfg, believed, cube_side);
  const Resolution res{cfg.camera.width, cfg.camera.height};
  const SceneSampler sampler(cfg, nullptr, res);
  Image img = rasterize(sampler, res, cfg.background, 1);
  for (std::size_t i = 0; i < 4; ++i) {
    draw_line(img, v[i], v[(i + 1) % 4], cfg.highlight.color);
    draw_line(img, v[i + 4], v[(i + 1) % 4 + 4], cfg.highlight.color);
    draw_line(img, v[i], v[i + 4], cfg.highlight.color);
  }
  return img;
}

bool fits_frustum(const SceneConfig& cfg, double max_offset) {
  try {
    for (const Vec3& c : cfg.tag.corners(cfg.plane)) {
      if (!in_raster(cfg.camera, project_point(cfg.camera, RigidTransform::identity(), c))) return false;
    }
    for (double sx : {-1.0, 1.0}) {
      for (double sy : {-1.0, 1.0}) {
        const RigidTransform believed = apply_offset(cfg.true_extrinsics, {sx * max_offset, sy * max_offset});
        for (const Vec2& q : compute_highlight_projector_pixels(cfg, believed)) {
          if (!in_raster(cfg.projector, q)) return false;
          const Vec3 landed = land_projector_pixel(cfg, q);
          if (!in_raster(cfg.camera, project_point(cfg.camera, RigidTransform::identity(), landed))) return false;
        }
      }
    }
  } catch (const Error&) {
    return false;
  }
  return true;
}

}  // namespace projcal
