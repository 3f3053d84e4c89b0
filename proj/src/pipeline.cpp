#include "brickasm/pipeline.hpp"

#include <algorithm>
#include <set>

#include "brickasm/error.hpp"
#include "brickasm/metrics.hpp"
#include "brickasm/scenegen.hpp"

namespace brickasm {

std::string to_string(GraphSource source) { return source == GraphSource::kGcn ? "gcn" : "gt-indicator"; }

GraphSource graph_source_from_string(const std::string& name) {
  if (name == "gcn") return GraphSource::kGcn;
  if (name == "gt-indicator") return GraphSource::kGtIndicator;
  throw Error(Errc::kInvalidArgument, "unknown graph source: " + name);
}

std::optional<Pose3> recover_pose(const BrickPrediction& brick, const BrickShape& shape,
                                  std::span<const Camera> cameras, const RecoveryOptions& opts, bool* low_quality) {
  RecoveredPosition pos;
  try {
    pos = recover_position(brick, cameras, opts);
  } catch (const Error& e) {
    if (e.code() != Errc::kNoVisibleViews) throw;
    if (low_quality) *low_quality = true;
    return std::nullopt;
  }
  const std::size_t k = std::min(brick.views.size(), cameras.size());
  std::vector<double> conf(k);
  std::vector<ViewRotation> rots(k);
  for (std::size_t v = 0; v < k; ++v) {
    conf[v] = brick.views[v].confidence;
    rots[v] = ViewRotation{brick.views[v].rot_sin, brick.views[v].rot_cos};
  }
  const std::span<const Camera> cams = cameras.first(k);
  const double yaw = shape.is_grid_shape() ? merge_rotation_discrete(rots, conf, cams, opts.theta)
                                           : merge_rotation_continuous(rots, conf, cams, opts.theta);
  if (low_quality) *low_quality = pos.low_quality;
  return Pose3{pos.position, wrap_angle(yaw)};
}

namespace {

Eigen::MatrixXd indicator_probs(const Scene& scene, const PredictionSet& predictions) {
  const auto assignment = match_predictions(predictions, scene);
  const std::set<Edge> truth(scene.support_edges.begin(), scene.support_edges.end());
  const auto n = static_cast<Eigen::Index>(predictions.bricks.size());
  Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q)
      if (p != q && assignment[p] >= 0 && assignment[q] >= 0 && truth.count(Edge{assignment[p], assignment[q]}))
        probs(p, q) = 1.0;
  return probs;
}

void snap_to_grid(Plan& plan, const Library& library) {
  AssemblyState state;
  for (int p : plan.order) {
    BrickPrediction& b = plan.predictions.bricks[p];
    if (!b.pose || !library.has_shape(b.shape_id)) continue;
    const BrickShape& shape = library.shape(b.shape_id);
    if (!shape.is_grid_shape()) continue;
    DiscretePose pose = to_discrete_pose(shape, *b.pose);
    if (!state.placements.empty()) {
      try {
        pose = snap_to_connection(b.pose->position, b.pose->yaw, state, shape);
      } catch (const Error& e) {
        if (e.code() != Errc::kNoFeasiblePose) throw;
        b.low_quality = true;
      }
    }
    if (state.collides(shape, pose)) b.low_quality = true;
    state.place(shape, pose);
    b.pose = to_world_pose(shape, pose);
  }
}

}  // namespace

Plan solve(const Scene& scene, const PredictionSet& predictions, const Library& library, const GcnParams* params,
           const SolveOptions& opts) {
  Plan plan;
  plan.scene = scene.name;
  plan.predictions = predictions;
  for (BrickPrediction& b : plan.predictions.bricks) {
    const BrickShape& shape = library.shape(b.shape_id);
    bool low = false;
    b.pose = recover_pose(b, shape, scene.cameras, opts.recovery, &low);
    b.low_quality = low;
  }

  Eigen::MatrixXd probs;
  const auto n = static_cast<Eigen::Index>(plan.predictions.bricks.size());
  if (opts.graph == GraphSource::kGtIndicator) {
    probs = indicator_probs(scene, plan.predictions);
  } else {
    if (!params) throw Error(Errc::kInvalidArgument, "graph source gcn needs network parameters");
    std::vector<BrickInstance> nodes;
    for (const BrickPrediction& b : plan.predictions.bricks)
      nodes.push_back({b.shape_id, b.texture_id, b.pose.value_or(Pose3{})});
    probs = n > 0 ? edge_probabilities(*params, node_features(nodes, library)) : Eigen::MatrixXd(0, 0);
  }
  plan.graph = build_plan(probs, opts.plan);
  plan.order = topological_order(plan.graph);
  snap_to_grid(plan, library);
  return plan;
}

}  // namespace brickasm
