#include "brickasm/triangulate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "brickasm/error.hpp"

namespace brickasm {

std::vector<int> select_views(std::span<const double> confidences, double theta) {
  std::vector<int> out;
  for (std::size_t i = 0; i < confidences.size(); ++i)
    if (confidences[i] > theta) out.push_back(static_cast<int>(i));
  return out;
}

namespace {

Vec3 perpendicular(const Vec3& z, const Ray& r) {
  const Vec3 w = z - r.origin;
  return w - w.dot(r.direction) * r.direction;
}

double huber(double d, double delta) { return d <= delta ? d * d / (2.0 * delta) : d - delta / 2.0; }

bool well_conditioned(std::span<const Ray> rays, double min_angle_deg) {
  const double max_cos = std::cos(min_angle_deg * kPi / 180.0);
  for (std::size_t i = 0; i < rays.size(); ++i)
    for (std::size_t j = i + 1; j < rays.size(); ++j)
      if (std::abs(rays[i].direction.dot(rays[j].direction)) <= max_cos) return true;
  return false;
}

}  // namespace

double ray_objective(const Vec3& z, std::span<const Ray> rays) {
  double h = 0.0;
  for (const Ray& r : rays) h += perpendicular(z, r).norm();
  return h;
}

double smoothed_objective(const Vec3& z, std::span<const Ray> rays, double delta) {
  double h = 0.0;
  for (const Ray& r : rays) h += huber(perpendicular(z, r).norm(), delta);
  return h;
}

Vec3 smoothed_gradient(const Vec3& z, std::span<const Ray> rays, double delta) {
  Vec3 g = Vec3::Zero();
  for (const Ray& r : rays) {
    const Vec3 w = perpendicular(z, r);
    g += w / std::max(w.norm(), delta);
  }
  return g;
}

Vec3 least_squares_point(std::span<const Ray> rays) {
  Mat3 a = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  for (const Ray& r : rays) {
    const Mat3 p = Mat3::Identity() - r.direction * r.direction.transpose();
    a += p;
    b += p * r.origin;
  }
  return a.ldlt().solve(b);
}

TriangulationResult triangulate(std::span<const Ray> rays, const TriangulationOptions& opts) {
  if (rays.size() < 2) throw Error(Errc::kInsufficientViews, "triangulation needs at least two rays");
  if (!well_conditioned(rays, opts.min_angle_deg))
    throw Error(Errc::kDegenerateGeometry, "all ray pairs are closer than the minimum angle");

  const double delta = opts.huber_delta;
  TriangulationResult res;
  res.initial = least_squares_point(rays);
  res.initial_residual = ray_objective(res.initial, rays);

  Vec3 z = res.initial;
  double f = smoothed_objective(z, rays, delta);
  res.trace.push_back(f);
  Vec3 g = smoothed_gradient(z, rays, delta);
  int it = 0;
  for (; it < opts.max_iterations && g.norm() >= opts.gradient_tolerance; ++it) {
    Mat3 metric = Mat3::Zero();
    for (const Ray& r : rays) {
      const double d = std::max(perpendicular(z, r).norm(), delta);
      metric += (Mat3::Identity() - r.direction * r.direction.transpose()) / d;
    }
    Vec3 dir = -metric.ldlt().solve(g);
    if (!dir.allFinite() || dir.dot(g) >= 0.0) dir = -g;
    const double slope = dir.dot(g);

    bool accepted = false;
    for (double step = opts.initial_step; step > 1e-30; step *= opts.shrink) {
      const Vec3 cand = z + step * dir;
      const double fc = smoothed_objective(cand, rays, delta);
      if (fc <= f + opts.armijo * step * slope) {
        z = cand;
        f = fc;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    res.trace.push_back(f);
    g = smoothed_gradient(z, rays, delta);
  }

  res.iterations = it;
  res.gradient_norm = g.norm();
  res.position = z;
  res.residual = ray_objective(z, rays);
  if (res.residual > res.initial_residual) {
    res.position = res.initial;
    res.residual = res.initial_residual;
  }
  return res;
}

RecoveredPosition recover_position(const BrickPrediction& prediction, std::span<const Camera> cameras,
                                   const RecoveryOptions& opts) {
  const std::size_t k = std::min(prediction.views.size(), cameras.size());
  std::vector<int> usable;  // views with a keypoint and positive confidence
  for (std::size_t v = 0; v < k; ++v)
    if (prediction.views[v].keypoint && prediction.views[v].confidence > 0.0) usable.push_back(static_cast<int>(v));
  if (usable.empty()) throw Error(Errc::kNoVisibleViews, "no view has positive confidence and a keypoint");

  auto rays_for = [&](const std::vector<int>& views) {
    std::vector<Ray> rays;
    for (int v : views) rays.push_back(keypoint_ray(cameras[v], *prediction.views[v].keypoint));
    return rays;
  };
  auto try_triangulate = [&](const std::vector<int>& views, bool low_quality) -> std::optional<RecoveredPosition> {
    if (views.size() < 2) return std::nullopt;
    try {
      const auto rays = rays_for(views);
      const auto t = triangulate(rays, opts.triangulation);
      return RecoveredPosition{t.position, low_quality, views, t.residual};
    } catch (const Error& e) {
      if (e.code() != Errc::kDegenerateGeometry && e.code() != Errc::kInsufficientViews) throw;
      return std::nullopt;
    }
  };

  std::vector<int> selected;
  for (int v : usable)
    if (prediction.views[v].confidence > opts.theta) selected.push_back(v);
  if (auto r = try_triangulate(selected, false)) return *r;
  if (usable.size() > selected.size())
    if (auto r = try_triangulate(usable, true)) return *r;

  // Single ray: closest point to the working-volume centre.
  const int best = *std::max_element(usable.begin(), usable.end(), [&](int a, int b) {
    return prediction.views[a].confidence < prediction.views[b].confidence;
  });
  const Ray ray = keypoint_ray(cameras[best], *prediction.views[best].keypoint);
  const Vec3 p = ray.origin + (opts.working_center - ray.origin).dot(ray.direction) * ray.direction;
  return RecoveredPosition{p, true, {best}, 0.0};
}

std::vector<int> rotation_views(std::span<const double> confidences, double theta) {
  auto views = select_views(confidences, theta);
  if (views.empty()) views = select_views(confidences, 0.0);
  if (views.empty()) throw Error(Errc::kNoVisibleViews, "no view has positive confidence");
  return views;
}

double merge_rotation_continuous(std::span<const ViewRotation> rotations, std::span<const double> confidences,
                                 std::span<const Camera> cameras, double theta) {
  double s = 0.0, c = 0.0;
  for (int v : rotation_views(confidences, theta)) {
    const double view = std::atan2(rotations[v].sin, rotations[v].cos);
    const double yaw = world_yaw(cameras[v], view);
    s += confidences[v] * std::sin(yaw);
    c += confidences[v] * std::cos(yaw);
  }
  return wrap_angle(std::atan2(s, c));
}

double merge_rotation_discrete(std::span<const ViewRotation> rotations, std::span<const double> confidences,
                               std::span<const Camera> cameras, double theta) {
  std::array<double, 4> weight{};
  std::array<int, 4> votes{};
  for (int v : rotation_views(confidences, theta)) {
    const double yaw = world_yaw(cameras[v], std::atan2(rotations[v].sin, rotations[v].cos));
    const int cls = static_cast<int>(((std::lround(yaw / (kPi / 2.0)) % 4) + 4) % 4);
    weight[cls] += confidences[v];
    ++votes[cls];
  }
  int best = 0;
  for (int cls = 1; cls < 4; ++cls)
    if (weight[cls] > weight[best] || (weight[cls] == weight[best] && votes[cls] > votes[best])) best = cls;
  return best * (kPi / 2.0);
}

DiscretePose snap_to_connection(const Vec3& position, double yaw, const AssemblyState& state,
                                const BrickShape& shape) {
  const auto poses = feasible_poses(state, shape);
  if (poses.empty()) throw Error(Errc::kNoFeasiblePose, "no feasible pose for shape " + shape.name);
  const double period = symmetry_period(shape.symmetry);
  auto key = [&](const DiscretePose& p) {
    const Pose3 w = to_world_pose(shape, p);
    return std::pair{(w.position - position).norm(), angle_distance(w.yaw, yaw, period)};
  };
  DiscretePose best = poses.front();
  auto best_key = key(best);
  for (std::size_t i = 1; i < poses.size(); ++i) {
    const auto k = key(poses[i]);
    const bool closer = k.first < best_key.first - 1e-9 ||
                        (std::abs(k.first - best_key.first) <= 1e-9 && k.second < best_key.second - 1e-12);
    if (closer) {
      best = poses[i];
      best_key = k;
    }
  }
  return best;
}

}  // namespace brickasm
