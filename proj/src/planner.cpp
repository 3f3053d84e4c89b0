#include "brickasm/planner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "brickasm/error.hpp"
#include "brickasm/scenegen.hpp"

namespace brickasm {

namespace {

bool grid_contact(const BrickShape& lower, const Pose3& lower_pose, const BrickShape& upper, const Pose3& upper_pose) {
  const auto below = footprint_cells(lower, to_discrete_pose(lower, lower_pose));
  const std::set<GridCell> occupied(below.begin(), below.end());
  for (const GridCell& s : socket_cells(upper, to_discrete_pose(upper, upper_pose)))
    if (occupied.count(GridCell{s.x, s.y, s.layer - 1})) return true;
  return false;
}

bool surface_contact(const BrickShape& lower, const Pose3& lower_pose, const BrickShape& upper, const Pose3& upper_pose) {
  const double top = lower_pose.position.z() + lower.height / 2.0;
  const double bottom = upper_pose.position.z() - upper.height / 2.0;
  if (std::abs(top - bottom) > kContactTolerance) return false;
  return polygon_area(clip_convex(world_footprint(upper, upper_pose), world_footprint(lower, lower_pose))) > 1e-9;
}

bool reaches(const std::vector<std::vector<int>>& adj, int from, int to) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<int> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (v == to) return true;
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
  }
  return false;
}

bool some_vertex_reaches_all(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  for (int r = 0; r < n; ++r) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{r};
    seen[r] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
    }
    if (count == n) return true;
  }
  return false;
}

}  // namespace

std::vector<Edge> gt_graph_from_supports(const Scene& scene, const Library& library) {
  std::vector<Edge> edges;
  const int n = static_cast<int>(scene.bricks.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const BrickShape& lower = library.shape(scene.bricks[i].shape_id);
      const BrickShape& upper = library.shape(scene.bricks[j].shape_id);
      const bool contact = lower.is_grid_shape() && upper.is_grid_shape()
                               ? grid_contact(lower, scene.bricks[i].pose, upper, scene.bricks[j].pose)
                               : surface_contact(lower, scene.bricks[i].pose, upper, scene.bricks[j].pose);
      if (contact) edges.push_back({i, j});
    }
  return edges;
}

RelationGraph build_plan(const Eigen::MatrixXd& probs, const PlanOptions& opts, std::vector<PlanStep>* trace) {
  if (probs.rows() != probs.cols()) throw Error(Errc::kInvalidArgument, "probability matrix must be square");
  const int n = static_cast<int>(probs.rows());
  RelationGraph g;
  g.n = n;
  g.probs = probs;

  std::vector<Edge> candidates;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) candidates.push_back({i, j});
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](const Edge& a, const Edge& b) { return probs(a.from, a.to) > probs(b.from, b.to); });

  std::vector<std::vector<int>> adj(n);
  if (opts.stop == PlanStop::kReachAll && some_vertex_reaches_all(adj)) return g;
  for (const Edge& e : candidates) {
    const double p = probs(e.from, e.to);
    if (opts.stop == PlanStop::kThreshold && !(p >= opts.threshold)) break;
    const bool accept = !reaches(adj, e.to, e.from);
    if (trace) trace->push_back({e, p, accept});
    if (!accept) continue;
    adj[e.from].push_back(e.to);
    g.accepted.push_back(e);
    if (opts.stop == PlanStop::kReachAll && some_vertex_reaches_all(adj)) break;
  }
  return g;
}

std::vector<int> topological_order(const RelationGraph& graph) {
  const int n = graph.n;
  std::vector<int> indegree(n, 0);
  std::vector<double> priority(n, 0.0);
  std::vector<std::vector<int>> adj(n);
  for (const Edge& e : graph.accepted) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n)
      throw Error(Errc::kInvalidArgument, "accepted edge out of range");
    adj[e.from].push_back(e.to);
    ++indegree[e.to];
    if (graph.probs.size() > 0) priority[e.to] = std::max(priority[e.to], graph.probs(e.from, e.to));
  }
  std::vector<int> order;
  std::vector<char> done(n, 0);
  while (static_cast<int>(order.size()) < n) {
    int best = -1;
    for (int v = 0; v < n; ++v)
      if (!done[v] && indegree[v] == 0 && (best < 0 || priority[v] > priority[best])) best = v;
    if (best < 0) throw Error(Errc::kCyclicGraph, "accepted edges contain a cycle");
    done[best] = 1;
    order.push_back(best);
    for (int w : adj[best]) --indegree[w];
  }
  return order;
}

bool position_matches(const BrickShape& shape, const Pose3& predicted, const Pose3& gt, const Tolerances& tol) {
  if (shape.is_grid_shape()) {
    const double h = lego_layer_height();
    auto cell = [&](const Pose3& p) {
      return std::array<long, 3>{std::lround(2.0 * p.position.x()), std::lround(2.0 * p.position.y()),
                                 std::lround((p.position.z() - h / 2.0) / h)};
    };
    return cell(predicted) == cell(gt);
  }
  return (predicted.position - gt.position).norm() < tol.position;
}

bool rotation_matches(const BrickShape& shape, const Pose3& predicted, const Pose3& gt, const Tolerances& tol) {
  if (shape.symmetry == Symmetry::kContinuous) return true;
  if (shape.is_grid_shape()) return to_discrete_pose(shape, predicted).rot == to_discrete_pose(shape, gt).rot;
  return angle_distance(predicted.yaw, gt.yaw, symmetry_period(shape.symmetry)) < tol.rotation_deg * kPi / 180.0;
}

bool pose_matches(const BrickShape& shape, const Pose3& predicted, const Pose3& gt, const Tolerances& tol) {
  return position_matches(shape, predicted, gt, tol) && rotation_matches(shape, predicted, gt, tol);
}

std::vector<StepOutcome> execute_plan(std::span<const int> order, const PredictionSet& predictions, const Scene& gt,
                                      const Library& library, std::span<const int> assignment, const Tolerances& tol) {
  const std::size_t n_gt = gt.bricks.size();
  std::vector<std::vector<int>> supporters(n_gt);
  for (const Edge& e : gt.support_edges) supporters.at(e.to).push_back(e.from);

  std::vector<char> placed(n_gt, 0), type_placed(n_gt, 0);
  std::vector<StepOutcome> out;
  for (int p : order) {
    StepOutcome step;
    step.brick = p;
    step.gt = p >= 0 && p < static_cast<int>(assignment.size()) ? assignment[p] : -1;
    if (step.gt >= 0 && step.gt < static_cast<int>(n_gt) && p < static_cast<int>(predictions.bricks.size())) {
      const BrickPrediction& pred = predictions.bricks[p];
      const BrickInstance& ref = gt.bricks[step.gt];
      const bool labels = pred.shape_id == ref.shape_id && pred.texture_id == ref.texture_id;
      const auto& sup = supporters[step.gt];
      const bool after = std::all_of(sup.begin(), sup.end(), [&](int s) { return placed[s] != 0; });
      const bool type_after = std::all_of(sup.begin(), sup.end(), [&](int s) { return type_placed[s] != 0; });
      step.type_correct = labels && type_after;
      step.correct = labels && after && pred.pose &&
                     pose_matches(library.shape(ref.shape_id), *pred.pose, ref.pose, tol);
      if (step.correct) placed[step.gt] = 1;
      if (step.type_correct) type_placed[step.gt] = 1;
    }
    out.push_back(step);
  }
  return out;
}

}  // namespace brickasm
