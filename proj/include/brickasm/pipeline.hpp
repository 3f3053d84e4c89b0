#pragma once

#include <string>
#include <vector>

#include "brickasm/model.hpp"
#include "brickasm/planner.hpp"
#include "brickasm/relgcn.hpp"
#include "brickasm/triangulate.hpp"

namespace brickasm {

enum class GraphSource {
  kGcn,          // trained relation network on recovered poses
  kGtIndicator,  // 1 on matched ground-truth supports, 0 elsewhere
};

std::string to_string(GraphSource source);
GraphSource graph_source_from_string(const std::string& name);

struct SolveOptions {
  RecoveryOptions recovery;
  PlanOptions plan;
  GraphSource graph = GraphSource::kGcn;
};

struct Plan {
  std::string scene;
  PredictionSet predictions;  // with recovered poses and low_quality flags
  RelationGraph graph;
  std::vector<int> order;
};

/// Recovered pose for one predicted brick, or nullopt when no view is usable.
/// Grid shapes get the quarter-turn vote, others the circular mean.
std::optional<Pose3> recover_pose(const BrickPrediction& brick, const BrickShape& shape,
                                  std::span<const Camera> cameras, const RecoveryOptions& opts, bool* low_quality);

/// Pose recovery, relation graph, greedy plan and order for one scene. Grid
/// shapes are then snapped to the stud grid in plan order. `scene` supplies the
/// cameras, and the ground truth for kGtIndicator. `params` is required for kGcn.
Plan solve(const Scene& scene, const PredictionSet& predictions, const Library& library, const GcnParams* params,
           const SolveOptions& opts = {});

}  // namespace brickasm
