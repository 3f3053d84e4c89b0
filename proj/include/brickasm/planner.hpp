#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "brickasm/model.hpp"

namespace brickasm {

/// Direct support contacts recomputed from geometry: (i, j) whenever j rests on i.
/// Grid shapes use stud/socket cells, all other shapes top/bottom contact with
/// overlapping footprints. Sorted.
std::vector<Edge> gt_graph_from_supports(const Scene& scene, const Library& library);

enum class PlanStop {
  kThreshold,  // stop at the first candidate edge below `threshold`
  kReachAll,   // stop once some vertex reaches every other vertex
};

struct PlanOptions {
  PlanStop stop = PlanStop::kThreshold;
  double threshold = 0.5;
};

struct PlanStep {
  Edge edge;
  double prob = 0.0;
  bool accepted = false;
};

/// Greedy DAG extraction: candidate edges in descending probability (ties by
/// (i, j)), each accepted unless it closes a directed cycle.
RelationGraph build_plan(const Eigen::MatrixXd& probs, const PlanOptions& opts = {},
                         std::vector<PlanStep>* trace = nullptr);

/// Kahn order; among ready bricks the highest maximum accepted incoming
/// probability goes first (0 without incoming edges), then the lower index.
/// Throws kCyclicGraph.
std::vector<int> topological_order(const RelationGraph& graph);

struct Tolerances {
  double position = 0.25;
  double rotation_deg = 15.0;
};

struct StepOutcome {
  int brick = -1;  // predicted brick placed at this step
  int gt = -1;     // matched ground-truth brick, -1 if unmatched
  bool correct = false;
  bool type_correct = false;  // shape + texture + predecessors, pose ignored
};

/// Grid shapes need the same cell centre and layer, other shapes a centre
/// error below tol.position.
bool position_matches(const BrickShape& shape, const Pose3& predicted, const Pose3& gt, const Tolerances& tol);
/// Yaw error modulo the shape's symmetry below tol.rotation_deg; grid shapes
/// need the same quarter turn.
bool rotation_matches(const BrickShape& shape, const Pose3& predicted, const Pose3& gt, const Tolerances& tol);
bool pose_matches(const BrickShape& shape, const Pose3& predicted, const Pose3& gt, const Tolerances& tol);

/// Replays the order against the ground truth. `assignment[p]` is the gt index
/// of predicted brick p or -1. A step also needs every gt supporter of its
/// brick to be placed at an earlier correct (resp. type-correct) step.
std::vector<StepOutcome> execute_plan(std::span<const int> order, const PredictionSet& predictions, const Scene& gt,
                                      const Library& library, std::span<const int> assignment,
                                      const Tolerances& tol = {});

}  // namespace brickasm
