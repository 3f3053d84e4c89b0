#pragma once

#include <span>
#include <vector>

#include "brickasm/geometry.hpp"
#include "brickasm/model.hpp"
#include "brickasm/scenegen.hpp"

namespace brickasm {

inline constexpr double kDefaultConfidenceThreshold = 0.66;

/// Indices whose confidence is strictly greater than `theta`.
std::vector<int> select_views(std::span<const double> confidences, double theta = kDefaultConfidenceThreshold);

struct TriangulationOptions {
  double min_angle_deg = 5.0;
  double huber_delta = 1e-6;
  int max_iterations = 200;
  double initial_step = 1.0;
  double shrink = 0.5;
  double gradient_tolerance = 1e-8;
  double armijo = 1e-4;
};

/// Sum of point-to-ray distances h(Z).
double ray_objective(const Vec3& z, std::span<const Ray> rays);
/// h(Z) with each distance replaced by its Huber smoothing (quadratic below delta).
double smoothed_objective(const Vec3& z, std::span<const Ray> rays, double delta);
Vec3 smoothed_gradient(const Vec3& z, std::span<const Ray> rays, double delta);
/// Closed-form minimizer of the sum of squared point-to-ray distances.
Vec3 least_squares_point(std::span<const Ray> rays);

struct TriangulationResult {
  Vec3 position = Vec3::Zero();
  double residual = 0.0;  // h(position), true (unsmoothed) distances
  Vec3 initial = Vec3::Zero();
  double initial_residual = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  // Smoothed objective after each accepted step (first entry: initial value).
  std::vector<double> trace;
};

/// Minimizes h(Z) over Z starting from the least-squares point.
///
/// Descent uses the smoothed gradient scaled by the inverse of
/// sum_i (I - d_i d_i^T) / max(dist_i, delta), so a unit step is the
/// Weiszfeld update for lines, with Armijo backtracking on the smoothed h.
/// Throws kInsufficientViews for < 2 rays and kDegenerateGeometry when no
/// pair of ray directions is at least min_angle apart.
TriangulationResult triangulate(std::span<const Ray> rays, const TriangulationOptions& opts = {});

struct RecoveryOptions {
  double theta = kDefaultConfidenceThreshold;
  Vec3 working_center = Vec3::Zero();
  TriangulationOptions triangulation;
};

struct RecoveredPosition {
  Vec3 position = Vec3::Zero();
  bool low_quality = false;
  std::vector<int> views;  // views whose rays were used
  double residual = 0.0;
};

/// Triangulates the views above theta. With fewer than two usable views it
/// falls back to every view with positive confidence, and with a single view
/// to the point on that ray closest to the working-volume centre; both
/// fallbacks set low_quality. Throws kNoVisibleViews if nothing is usable.
RecoveredPosition recover_position(const BrickPrediction& prediction, std::span<const Camera> cameras,
                                   const RecoveryOptions& opts = {});

struct ViewRotation {
  double sin = 0.0;
  double cos = 1.0;
};

/// Views feeding a rotation merge: those above theta, else every view with positive confidence.
std::vector<int> rotation_views(std::span<const double> confidences, double theta);

/// Confidence-weighted circular mean of per-view world yaws.
double merge_rotation_continuous(std::span<const ViewRotation> rotations, std::span<const double> confidences,
                                 std::span<const Camera> cameras, double theta = kDefaultConfidenceThreshold);

/// Votes over {0, 90, 180, 270} degrees; ties go to more votes, then the lower angle.
double merge_rotation_discrete(std::span<const ViewRotation> rotations, std::span<const double> confidences,
                               std::span<const Camera> cameras, double theta = kDefaultConfidenceThreshold);

/// Nearest feasible stud-grid pose, by centre distance then symmetry-aware yaw distance.
DiscretePose snap_to_connection(const Vec3& position, double yaw, const AssemblyState& state,
                                const BrickShape& shape);

}  // namespace brickasm
