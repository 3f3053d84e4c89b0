#pragma once

#include <vector>

#include "brickasm/model.hpp"
#include "brickasm/rng.hpp"

namespace brickasm {

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();  // unit length
};

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

/// Pinhole projection into normalized image coordinates.
/// Throws Error(kBehindCamera) when the camera-frame depth is <= 0.
Projection project(const Camera& camera, const Vec3& point);

/// Back-projects a keypoint through the camera-frame points at depth -1 and +1.
/// The origin is the optical centre; the direction points toward positive depth.
Ray keypoint_ray(const Camera& camera, const Vec2& keypoint);

/// Shortest distance from `point` to the infinite line carrying `ray`.
double point_ray_distance(const Vec3& point, const Ray& ray);

/// Camera at `eye` looking at `target` with +z world up and zero roll.
Camera look_at(const Vec3& eye, const Vec3& target, double focal = 1.0, int width = 224, int height = 224);

struct CameraSampling {
  int count = 4;
  double distance = 12.0;
  double jitter_radius = 1.5;
  // Camera k (1-based) views from azimuth 90k +- spread and elevation 45 +- spread, in degrees.
  double azimuth_spread_deg = 30.0;
  double elevation_deg = 45.0;
  double elevation_spread_deg = 15.0;
  double focal = 1.0;
  int width = 224;
  int height = 224;
  Vec3 target = Vec3::Zero();
};

/// Samples `count` cameras around `target`.
///
/// The triple (0, azimuth, elevation) is read as a Z-Y-X Euler rotation of the
/// viewing direction: yaw about +z by the azimuth, pitch by the elevation, zero
/// roll. The eye sits `distance` from the target along that direction, plus a
/// uniform offset inside a ball of `jitter_radius`, and looks at the target.
std::vector<Camera> sample_cameras(Rng& rng, const CameraSampling& opts = {});

struct BrickRaster {
  Mask full;     // the brick's splat with every other brick removed
  Mask visible;  // cells the brick wins in the shared z-buffer
  double visible_ratio = 0.0;
};

/// Splats every brick's point cloud (one raster cell per point) through a
/// shared z-buffer. Depth ties go to the lower brick index.
std::vector<BrickRaster> rasterize_scene(const Scene& scene, const Library& library, const Camera& camera,
                                         int height = 224, int width = 224);

/// Brick points transformed into world coordinates.
std::vector<Vec3> world_points(const BrickShape& shape, const Pose3& pose);

/// (yaw - camera azimuth) mod 2*pi.
double view_rotation(const Camera& camera, double yaw);

/// Inverse of view_rotation: world yaw seen by `camera`.
double world_yaw(const Camera& camera, double view_rot);

}  // namespace brickasm
