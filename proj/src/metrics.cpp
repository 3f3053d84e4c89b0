#include "brickasm/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "brickasm/error.hpp"

namespace brickasm {

namespace {

// Square minimum-cost assignment with row and column potentials.
double solve_square(const Eigen::MatrixXd& a, std::vector<int>* row_to_col = nullptr) {
  const int n = static_cast<int>(a.rows());
  if (n == 0) {
    if (row_to_col) row_to_col->clear();
    return 0.0;
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> ans(n, -1);
  for (int j = 1; j <= n; ++j) ans[p[j] - 1] = j - 1;
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += a(i, ans[i]);
  if (row_to_col) *row_to_col = std::move(ans);
  return total;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  Eigen::MatrixXd s(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) s(i, j) = a(rows[i], cols[j]);
  return s;
}

double safe_iou(const Mask& pred, const Mask& gt) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) return 0.0;
  return mask_iou(pred, gt);
}

}  // namespace

Assignment hungarian(const Eigen::MatrixXd& cost) {
  if (!cost.allFinite()) throw Error(Errc::kInvalidArgument, "hungarian: costs must be finite");
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const int size = std::max(n, m);
  Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(size, size);
  padded.topLeftCorner(n, m) = cost;
  const double optimum = solve_square(padded);
  const double tol = 1e-9 * std::max(1.0, std::abs(optimum));

  Assignment out;
  out.row_to_col.assign(n, -1);
  std::vector<int> free_rows(size), free_cols(size);
  for (int i = 0; i < size; ++i) free_rows[i] = free_cols[i] = i;
  double fixed = 0.0;
  for (int r = 0; r < n; ++r) {
    std::vector<int> rows;
    for (int x : free_rows)
      if (x != r) rows.push_back(x);
    // Real columns in order, then one representative padding column.
    std::vector<int> candidates;
    for (int c : free_cols)
      if (c < m) candidates.push_back(c);
    for (int c : free_cols)
      if (c >= m) {
        candidates.push_back(c);
        break;
      }
    bool done = false;
    for (int c : candidates) {
      std::vector<int> cols;
      for (int x : free_cols)
        if (x != c) cols.push_back(x);
      const double total = fixed + padded(r, c) + solve_square(submatrix(padded, rows, cols));
      if (std::abs(total - optimum) <= tol) {
        fixed += padded(r, c);
        out.row_to_col[r] = c < m ? c : -1;
        free_rows = rows;
        free_cols = cols;
        done = true;
        break;
      }
    }
    if (!done) throw Error(Errc::kInvalidArgument, "hungarian: lost optimality while fixing rows");
  }
  out.cost = 0.0;
  for (int r = 0; r < n; ++r)
    if (out.row_to_col[r] >= 0) out.cost += cost(r, out.row_to_col[r]);
  return out;
}

double match_cost(const BrickPrediction& pred, const BrickInstance& gt, std::span<const ViewAnnotation> gt_views) {
  double c = (pred.shape_id != gt.shape_id ? 1.0 : 0.0) + (pred.texture_id != gt.texture_id ? 1.0 : 0.0);
  double kp = 0.0;
  int views = 0;
  for (std::size_t v = 0; v < std::min(pred.views.size(), gt_views.size()); ++v) {
    if (!pred.views[v].keypoint || !gt_views[v].keypoint) continue;
    kp += (*pred.views[v].keypoint - *gt_views[v].keypoint).norm();
    ++views;
  }
  if (views > 0) c += kp / views;
  if (pred.pose) c += 0.1 * (pred.pose->position - gt.pose.position).norm();
  return c;
}

std::vector<int> match_predictions(const PredictionSet& predictions, const Scene& gt) {
  const auto n = static_cast<Eigen::Index>(predictions.bricks.size());
  const auto m = static_cast<Eigen::Index>(gt.bricks.size());
  Eigen::MatrixXd cost(n, m);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index g = 0; g < m; ++g) {
      std::span<const ViewAnnotation> views;
      if (gt.annotated()) views = gt.annotations.at(g);
      cost(p, g) = match_cost(predictions.bricks[p], gt.bricks[g], views);
    }
  return hungarian(cost).row_to_col;
}

void per_step_metrics(SceneEvaluation& eval, const PredictionSet& predictions, const Scene& gt, const Library& library,
                      std::span<const int> assignment, std::span<const Edge> accepted, const Tolerances& tol) {
  if (assignment.size() != predictions.bricks.size())
    throw Error(Errc::kMissingAssignment, "assignment has " + std::to_string(assignment.size()) + " entries for " +
                                              std::to_string(predictions.bricks.size()) + " predicted bricks");
  eval.scene = gt.name;
  eval.gt_count = static_cast<int>(gt.bricks.size());
  std::vector<char> matched(gt.bricks.size(), 0);
  for (std::size_t p = 0; p < assignment.size(); ++p) {
    const int g = assignment[p];
    if (g < 0) continue;
    if (g >= static_cast<int>(gt.bricks.size()) || matched[g])
      throw Error(Errc::kMissingAssignment, "assignment entry " + std::to_string(p) + " is invalid");
    matched[g] = 1;
    const BrickPrediction& pred = predictions.bricks[p];
    const BrickInstance& ref = gt.bricks[g];
    const BrickShape& shape = library.shape(ref.shape_id);
    const bool shape_ok = pred.shape_id == ref.shape_id;
    const bool texture_ok = pred.texture_id == ref.texture_id;
    const bool pos_ok = pred.pose && position_matches(shape, *pred.pose, ref.pose, tol);
    const bool rot_ok = pred.pose && rotation_matches(shape, *pred.pose, ref.pose, tol);
    eval.shape_ok += shape_ok;
    eval.texture_ok += texture_ok;
    eval.pos_ok += pos_ok;
    eval.rot_ok += rot_ok;
    eval.step_ok += shape_ok && texture_ok && pos_ok && rot_ok;

    if (!gt.annotated()) continue;
    const auto& views = gt.annotations.at(g);
    for (std::size_t v = 0; v < views.size(); ++v) {
      if (views[v].visible_ratio <= 0.0) continue;
      const ViewPrediction* pv = v < pred.views.size() ? &pred.views[v] : nullptr;
      eval.iou_sum += pv ? safe_iou(pv->mask, views[v].mask) : 0.0;
      ++eval.iou_count;
      if (pv && pv->keypoint && views[v].keypoint) {
        eval.kps_sq_sum += (*pv->keypoint - *views[v].keypoint).squaredNorm();
        ++eval.kps_count;
      }
    }
  }
  if (gt.annotated())
    for (std::size_t g = 0; g < gt.bricks.size(); ++g)
      if (!matched[g])
        for (const auto& a : gt.annotations[g])
          if (a.visible_ratio > 0.0) ++eval.iou_count;

  const auto gt_edges = gt_graph_from_supports(gt, library);
  const std::set<Edge> truth(gt_edges.begin(), gt_edges.end());
  std::set<Edge> predicted;
  int unmapped = 0;
  for (const Edge& e : accepted) {
    const int a = e.from >= 0 && e.from < static_cast<int>(assignment.size()) ? assignment[e.from] : -1;
    const int b = e.to >= 0 && e.to < static_cast<int>(assignment.size()) ? assignment[e.to] : -1;
    if (a < 0 || b < 0) {
      ++unmapped;
      continue;
    }
    predicted.insert({a, b});
  }
  int tp = 0;
  for (const Edge& e : predicted) tp += truth.count(e) ? 1 : 0;
  eval.edge_tp = tp;
  eval.edge_fp = static_cast<int>(predicted.size()) - tp + unmapped;
  eval.edge_fn = static_cast<int>(truth.size()) - tp;
}

void per_scene_metrics(SceneEvaluation& eval, std::span<const StepOutcome> steps, int gt_count, int predicted_count) {
  eval.gt_count = gt_count;
  eval.predicted_count = predicted_count;
  eval.prefix = 0;
  while (eval.prefix < static_cast<int>(steps.size()) && steps[eval.prefix].correct) ++eval.prefix;
  eval.type_prefix = 0;
  while (eval.type_prefix < static_cast<int>(steps.size()) && steps[eval.type_prefix].type_correct) ++eval.type_prefix;
  eval.prefix = std::min(eval.prefix, gt_count);
  eval.type_prefix = std::min(eval.type_prefix, gt_count);
}

SceneEvaluation evaluate_scene(const PredictionSet& predictions, const Scene& gt, const Library& library,
                               std::span<const int> order, std::span<const Edge> accepted, const Tolerances& tol) {
  const auto assignment = match_predictions(predictions, gt);
  SceneEvaluation eval;
  per_step_metrics(eval, predictions, gt, library, assignment, accepted, tol);
  const auto steps = execute_plan(order, predictions, gt, library, assignment, tol);
  per_scene_metrics(eval, steps, static_cast<int>(gt.bricks.size()), predictions.predicted_count);
  return eval;
}

std::vector<double> cca_distribution(std::span<const int> prefixes, int n_max) {
  if (prefixes.empty()) throw Error(Errc::kEmptyInput, "cca_distribution needs at least one prefix");
  if (n_max < 0) throw Error(Errc::kInvalidArgument, "cca_distribution: n_max must be >= 0");
  std::vector<long> counts(n_max + 1, 0);
  for (int p : prefixes) {
    if (p < 0 || p > n_max) throw Error(Errc::kInvalidArgument, "prefix outside 0..n_max");
    ++counts[p];
  }
  std::vector<double> hist(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k)
    hist[k] = static_cast<double>(counts[k]) / static_cast<double>(prefixes.size());
  return hist;
}

MetricsReport aggregate(std::span<const SceneEvaluation> scenes) {
  if (scenes.empty()) throw Error(Errc::kEmptyInput, "no scenes to aggregate");
  MetricsReport r;
  r.scenes.assign(scenes.begin(), scenes.end());
  std::stable_sort(r.scenes.begin(), r.scenes.end(),
                   [](const SceneEvaluation& a, const SceneEvaluation& b) { return a.scene < b.scene; });

  long gt_total = 0, shape = 0, texture = 0, pos = 0, rot = 0, step = 0, kps_n = 0, iou_n = 0, tp = 0, fp = 0, fn = 0;
  double complete = 0.0, order = 0.0, kps = 0.0, iou = 0.0;
  int full = 0, count_ok = 0, n_max = 0;
  std::vector<int> prefixes;
  for (const SceneEvaluation& s : r.scenes) {
    gt_total += s.gt_count;
    shape += s.shape_ok;
    texture += s.texture_ok;
    pos += s.pos_ok;
    rot += s.rot_ok;
    step += s.step_ok;
    kps += s.kps_sq_sum;
    kps_n += s.kps_count;
    iou += s.iou_sum;
    iou_n += s.iou_count;
    tp += s.edge_tp;
    fp += s.edge_fp;
    fn += s.edge_fn;
    complete += s.gt_count > 0 ? static_cast<double>(s.prefix) / s.gt_count : 1.0;
    order += s.gt_count > 0 ? static_cast<double>(s.type_prefix) / s.gt_count : 1.0;
    full += s.prefix == s.gt_count;
    count_ok += s.predicted_count == s.gt_count;
    n_max = std::max(n_max, s.gt_count);
    prefixes.push_back(s.prefix);
  }
  const double scenes_n = static_cast<double>(r.scenes.size());
  auto rate = [&](long ok) { return gt_total > 0 ? static_cast<double>(ok) / static_cast<double>(gt_total) : 1.0; };
  r.complete_rate = complete / scenes_n;
  r.per_scene_acc = full / scenes_n;
  r.count_acc = count_ok / scenes_n;
  r.order_cr = order / scenes_n;
  r.shape_acc = rate(shape);
  r.texture_acc = rate(texture);
  r.pos_acc = rate(pos);
  r.rot_acc = rate(rot);
  r.per_step_acc = rate(step);
  r.kps_mse = kps_n > 0 ? 1000.0 * kps / static_cast<double>(kps_n) : 0.0;
  r.miou = iou_n > 0 ? iou / static_cast<double>(iou_n) : 1.0;
  r.edge_f1 = tp + fp + fn > 0 ? 2.0 * tp / static_cast<double>(2 * tp + fp + fn) : 1.0;
  r.cca_histogram = cca_distribution(prefixes, n_max);
  return r;
}

}  // namespace brickasm
