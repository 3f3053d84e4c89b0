#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "brickasm/model.hpp"
#include "brickasm/planner.hpp"

namespace brickasm {

struct Assignment {
  std::vector<int> row_to_col;  // -1 for unassigned rows
  double cost = 0.0;
};

/// Minimum-cost assignment of min(n, m) pairs. Among optimal assignments the
/// lexicographically smallest row_to_col wins (assigned columns before -1).
Assignment hungarian(const Eigen::MatrixXd& cost);

/// Shape and texture mismatch (1 each) + mean keypoint distance over views
/// where both have a keypoint + 0.1 * position error when a pose is present.
double match_cost(const BrickPrediction& pred, const BrickInstance& gt, std::span<const ViewAnnotation> gt_views);

/// assignment[p] = gt index of predicted brick p, or -1.
std::vector<int> match_predictions(const PredictionSet& predictions, const Scene& gt);

// Sums and counts for one scene; reports are built from any collection of these.
struct SceneEvaluation {
  std::string scene;
  int gt_count = 0;
  int predicted_count = 0;
  int prefix = 0;       // correct steps before the first failure
  int type_prefix = 0;  // same, with pose ignored
  int shape_ok = 0;
  int texture_ok = 0;
  int pos_ok = 0;
  int rot_ok = 0;
  int step_ok = 0;  // all four checks
  double kps_sq_sum = 0.0;
  int kps_count = 0;
  double iou_sum = 0.0;
  int iou_count = 0;
  int edge_tp = 0;
  int edge_fp = 0;
  int edge_fn = 0;
};

/// Fills the per-brick fields (labels, pose checks, keypoints, masks, edges).
/// `accepted` uses predicted-brick indices. Throws kMissingAssignment if the
/// assignment does not cover every predicted brick.
void per_step_metrics(SceneEvaluation& eval, const PredictionSet& predictions, const Scene& gt, const Library& library,
                      std::span<const int> assignment, std::span<const Edge> accepted, const Tolerances& tol = {});

/// Fills counts and prefixes from execute_plan output.
void per_scene_metrics(SceneEvaluation& eval, std::span<const StepOutcome> steps, int gt_count, int predicted_count);

/// Matching, plan replay and every metric for one scene.
SceneEvaluation evaluate_scene(const PredictionSet& predictions, const Scene& gt, const Library& library,
                               std::span<const int> order, std::span<const Edge> accepted,
                               const Tolerances& tol = {});

/// Normalized histogram over {0..n_max}. Throws kEmptyInput.
std::vector<double> cca_distribution(std::span<const int> prefixes, int n_max);

inline constexpr const char* kKpsMseUnit = "1e-3 normalized image units squared";

struct MetricsReport {
  double complete_rate = 0.0;
  double per_scene_acc = 0.0;
  double count_acc = 0.0;
  double order_cr = 0.0;
  double per_step_acc = 0.0;
  double pos_acc = 0.0;
  double rot_acc = 0.0;
  double shape_acc = 0.0;
  double texture_acc = 0.0;
  double miou = 0.0;
  double kps_mse = 0.0;  // kKpsMseUnit
  double edge_f1 = 0.0;
  std::vector<double> cca_histogram;
  std::vector<SceneEvaluation> scenes;
};

/// Scene-level rates average over scenes; brick-level rates divide by the total
/// gt brick count; Kps MSE, mIoU and F1 pool all views and edges. The result
/// does not depend on scene order. Throws kEmptyInput.
MetricsReport aggregate(std::span<const SceneEvaluation> scenes);

}  // namespace brickasm
