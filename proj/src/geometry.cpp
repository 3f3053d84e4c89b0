#include "brickasm/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "brickasm/error.hpp"

namespace brickasm {

Projection project(const Camera& camera, const Vec3& point) {
  const Vec3 pc = camera.rotation * point + camera.translation;
  if (pc.z() <= 0.0) throw Error(Errc::kBehindCamera, "point has non-positive camera depth");
  return {camera.cx + camera.fx * pc.x() / pc.z(), camera.cy + camera.fy * pc.y() / pc.z(), pc.z()};
}

Ray keypoint_ray(const Camera& camera, const Vec2& keypoint) {
  const double x = (keypoint.x() - camera.cx) / camera.fx;
  const double y = (keypoint.y() - camera.cy) / camera.fy;
  const Mat3 rt = camera.rotation.transpose();
  // Camera-frame points (x, y, 1) * depth for depth -1 and +1, mapped to world.
  const Vec3 near = rt * (Vec3(x, y, 1.0) * -1.0 - camera.translation);
  const Vec3 far = rt * (Vec3(x, y, 1.0) - camera.translation);
  Ray ray;
  ray.origin = 0.5 * (near + far);
  ray.direction = (far - near).normalized();
  return ray;
}

double point_ray_distance(const Vec3& point, const Ray& ray) {
  const Vec3 w = point - ray.origin;
  return (w - w.dot(ray.direction) * ray.direction).norm();
}

Camera look_at(const Vec3& eye, const Vec3& target, double focal, int width, int height) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(Vec3::UnitZ());
  if (right.norm() < 1e-12) right = Vec3::UnitX();  // looking straight up or down
  right.normalize();
  const Vec3 down = forward.cross(right);
  Camera cam;
  cam.rotation.row(0) = right.transpose();
  cam.rotation.row(1) = down.transpose();
  cam.rotation.row(2) = forward.transpose();
  cam.translation = -cam.rotation * eye;
  cam.fx = cam.fy = focal;
  cam.cx = cam.cy = 0.5;
  cam.width = width;
  cam.height = height;
  return cam;
}

std::vector<Camera> sample_cameras(Rng& rng, const CameraSampling& opts) {
  if (opts.count < 1) throw Error(Errc::kInvalidArgument, "sample_cameras needs count >= 1");
  constexpr double deg = kPi / 180.0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Camera> cams;
  for (int k = 1; k <= opts.count; ++k) {
    const double azimuth = (90.0 * k + opts.azimuth_spread_deg * sym(rng)) * deg;
    const double elevation = (opts.elevation_deg + opts.elevation_spread_deg * sym(rng)) * deg;
    const Vec3 dir(std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                   std::sin(elevation));
    Vec3 jitter(gauss(rng), gauss(rng), gauss(rng));
    const double radius = opts.jitter_radius * std::cbrt(unit(rng));
    jitter = jitter.norm() > 0.0 ? Vec3(jitter.normalized() * radius) : Vec3::Zero();
    const Vec3 eye = opts.target + opts.distance * dir + jitter;
    cams.push_back(look_at(eye, opts.target, opts.focal, opts.width, opts.height));
  }
  return cams;
}

std::vector<Vec3> world_points(const BrickShape& shape, const Pose3& pose) {
  const double c = std::cos(pose.yaw), s = std::sin(pose.yaw);
  std::vector<Vec3> out;
  out.reserve(shape.point_cloud.size());
  for (const Vec3& p : shape.point_cloud)
    out.emplace_back(pose.position.x() + c * p.x() - s * p.y(), pose.position.y() + s * p.x() + c * p.y(),
                     pose.position.z() + p.z());
  return out;
}

std::vector<BrickRaster> rasterize_scene(const Scene& scene, const Library& library, const Camera& camera,
                                         int height, int width) {
  const std::size_t cells = static_cast<std::size_t>(height) * width;
  const std::size_t n = scene.bricks.size();
  std::vector<double> zbuf(cells, std::numeric_limits<double>::infinity());
  std::vector<int> owner(cells, -1);
  std::vector<std::vector<std::uint8_t>> full(n, std::vector<std::uint8_t>(cells, 0));

  for (std::size_t b = 0; b < n; ++b) {
    const auto& brick = scene.bricks[b];
    for (const Vec3& p : world_points(library.shape(brick.shape_id), brick.pose)) {
      const Vec3 pc = camera.rotation * p + camera.translation;
      if (pc.z() <= 0.0) continue;
      const double u = camera.cx + camera.fx * pc.x() / pc.z();
      const double v = camera.cy + camera.fy * pc.y() / pc.z();
      if (!(u >= 0.0 && u < 1.0 && v >= 0.0 && v < 1.0)) continue;
      const std::size_t col = std::min<std::size_t>(static_cast<std::size_t>(u * width), width - 1);
      const std::size_t row = std::min<std::size_t>(static_cast<std::size_t>(v * height), height - 1);
      const std::size_t cell = row * width + col;
      full[b][cell] = 1;
      if (pc.z() < zbuf[cell]) {
        zbuf[cell] = pc.z();
        owner[cell] = static_cast<int>(b);
      }
    }
  }

  std::vector<BrickRaster> out(n);
  for (std::size_t b = 0; b < n; ++b) {
    std::vector<std::uint8_t> vis(cells, 0);
    std::size_t vis_count = 0, full_count = 0;
    for (std::size_t c = 0; c < cells; ++c) {
      full_count += full[b][c];
      if (owner[c] == static_cast<int>(b)) {
        vis[c] = 1;
        ++vis_count;
      }
    }
    out[b].full = Mask::encode(full[b], height, width);
    out[b].visible = Mask::encode(vis, height, width);
    out[b].visible_ratio = full_count == 0 ? 0.0 : static_cast<double>(vis_count) / static_cast<double>(full_count);
  }
  return out;
}

double view_rotation(const Camera& camera, double yaw) { return wrap_angle(yaw - camera.azimuth()); }

double world_yaw(const Camera& camera, double view_rot) { return wrap_angle(view_rot + camera.azimuth()); }

}  // namespace brickasm
