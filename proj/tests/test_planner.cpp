#include "doctest.h"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include "brickasm/planner.hpp"
#include "brickasm/scenegen.hpp"
#include "brickasm/stub.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace brickasm;
using Eigen::MatrixXd;
using namespace oracles;

namespace {

MatrixXd random_probs(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixXd p(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p(i, j) = rng() % 5 == 0 ? 0.5 : u(rng);  // some exact ties
  return p;
}

// Walks the valid orders step by step, keeping the highest priority (then lowest
// index) choice available after the prefix chosen so far.
std::vector<int> preferred_order(const RelationGraph& g, const std::vector<std::vector<int>>& orders) {
  std::vector<double> prio(g.n, 0.0);
  for (const Edge& e : g.accepted) prio[e.to] = std::max(prio[e.to], g.probs(e.from, e.to));
  std::vector<int> order;
  for (int step = 0; step < g.n; ++step) {
    std::vector<std::pair<double, int>> cands;
    for (const auto& o : orders) {
      if (!std::equal(order.begin(), order.end(), o.begin())) continue;
      cands.push_back({prio[o[step]], -o[step]});
    }
    const auto best = *std::max_element(cands.begin(), cands.end());
    order.push_back(-best.second);
  }
  return order;
}

}  // namespace

TEST_SUITE("planner") {

TEST_CASE("greedy plan example") {
  MatrixXd p = MatrixXd::Constant(3, 3, 0.1);
  p(0, 1) = 0.9;
  p(1, 0) = 0.8;
  p(1, 2) = 0.7;
  for (PlanStop stop : {PlanStop::kThreshold, PlanStop::kReachAll}) {
    std::vector<PlanStep> trace;
    RelationGraph g = build_plan(p, {stop, 0.5}, &trace);
    CHECK(g.accepted == std::vector<Edge>{{0, 1}, {1, 2}});
    REQUIRE(trace.size() == 3);
    CHECK_FALSE(trace[1].accepted);
    CHECK(trace[1].edge == Edge{1, 0});
    CHECK(topological_order(g) == std::vector<int>{0, 1, 2});
  }
  CHECK(build_plan(MatrixXd::Zero(1, 1)).accepted.empty());
  CHECK(topological_order(build_plan(MatrixXd::Zero(1, 1))) == std::vector<int>{0});
}

TEST_CASE("random matrices against a direct simulation") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 8;
    MatrixXd p = random_probs(rng, n);
    for (PlanOptions opts : {PlanOptions{PlanStop::kThreshold, 0.5}, PlanOptions{PlanStop::kThreshold, 0.0},
                             PlanOptions{PlanStop::kReachAll, 0.5}}) {
      std::vector<PlanStep> trace;
      RelationGraph g = build_plan(p, opts, &trace);
      CHECK(acyclic(n, g.accepted));
      auto want = simulate(p, opts);
      REQUIRE(trace.size() == want.size());
      for (std::size_t k = 0; k < trace.size(); ++k) {
        CHECK(trace[k].edge == want[k].edge);
        CHECK(trace[k].accepted == want[k].accepted);
      }
      if (g.accepted.empty()) continue;
      const double last = p(g.accepted.back().from, g.accepted.back().to);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j || std::find(g.accepted.begin(), g.accepted.end(), Edge{i, j}) != g.accepted.end()) continue;
          if (p(i, j) <= last) continue;
          auto with = g.accepted;
          with.push_back({i, j});
          CHECK_FALSE(acyclic(n, with));
        }
    }
  }
}

TEST_CASE("orders are valid and follow the priority rule") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 6;
    RelationGraph g = build_plan(random_probs(rng, n), {PlanStop::kThreshold, 0.3});
    std::vector<std::vector<int>> orders;
    std::vector<int> prefix;
    std::vector<char> used(n, 0);
    all_topological_orders(n, g.accepted, prefix, used, orders);
    const auto got = topological_order(g);
    CHECK(std::find(orders.begin(), orders.end(), got) != orders.end());
    CHECK(got == preferred_order(g, orders));
  }
}

TEST_CASE("order examples") {
  RelationGraph empty;
  empty.n = 3;
  CHECK(topological_order(empty) == std::vector<int>{0, 1, 2});

  RelationGraph diamond;
  diamond.n = 4;
  diamond.probs = MatrixXd::Zero(4, 4);
  diamond.probs(0, 1) = 0.9;
  diamond.probs(0, 2) = 0.8;
  diamond.probs(1, 3) = 0.6;
  diamond.probs(2, 3) = 0.6;
  diamond.accepted = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  CHECK(topological_order(diamond) == std::vector<int>{0, 1, 2, 3});
  diamond.probs(0, 2) = 0.95;
  CHECK(topological_order(diamond) == std::vector<int>{0, 2, 1, 3});

  RelationGraph cyclic;
  cyclic.n = 2;
  cyclic.accepted = {{0, 1}, {1, 0}};
  CHECK(fixtures::throws_code([&] { topological_order(cyclic); }, Errc::kCyclicGraph));
}

TEST_CASE("ground-truth indicator plans respect the support graph") {
  for (const char* style : {"clevr", "lego"}) {
    const Library& lib = builtin_library(style);
    GenConfig cfg;
    cfg.style = style_from_string(style);
    cfg.seed = 8;
    for (int i = 0; i < 50; ++i) {
      Scene s = generate_scene(lib, cfg, i);
      const int n = static_cast<int>(s.bricks.size());
      MatrixXd p = MatrixXd::Zero(n, n);
      for (const Edge& e : s.support_edges) p(e.from, e.to) = 1.0;
      RelationGraph g = build_plan(p);
      auto sorted_edges = s.support_edges;
      std::sort(sorted_edges.begin(), sorted_edges.end());
      auto accepted = g.accepted;
      std::sort(accepted.begin(), accepted.end());
      CHECK(accepted == sorted_edges);
      auto order = topological_order(g);
      std::vector<int> pos(n);
      for (int k = 0; k < n; ++k) pos[order[k]] = k;
      for (const Edge& e : s.support_edges) CHECK(pos[e.from] < pos[e.to]);
      CHECK(gt_graph_from_supports(s, lib) == sorted_edges);
    }
  }
}

TEST_CASE("support graph from geometry") {
  const Library& lib = builtin_library("clevr");
  Scene tower = fixtures::clevr_scene({fixtures::brick_on(lib, 0, 0, 0, 0, 0), fixtures::brick_on(lib, 0, 0, 0, 0, 1)},
                                      {});
  CHECK(gt_graph_from_supports(tower, lib) == std::vector<Edge>{{0, 1}});
  Scene flat = fixtures::clevr_scene({fixtures::brick_on(lib, 0, 0, -2, 0, 0), fixtures::brick_on(lib, 0, 0, 0, 0, 0),
                                      fixtures::brick_on(lib, 0, 0, 2, 0, 0)},
                                     {});
  CHECK(gt_graph_from_supports(flat, lib).empty());
  Scene bridge = fixtures::clevr_scene({fixtures::brick_on(lib, 0, 0, -0.5, 0, 0),
                                        fixtures::brick_on(lib, 0, 0, 0.5, 0, 0),
                                        fixtures::brick_on(lib, 2, 0, 0, 0, 1, kPi / 2)},
                                       {});
  CHECK(gt_graph_from_supports(bridge, lib) == std::vector<Edge>{{0, 2}, {1, 2}});
}

TEST_CASE("pose tolerance checks") {
  const Library& lib = builtin_library("clevr");
  const Tolerances tol;
  Pose3 gt{Vec3(0, 0, 0.5), 0.3};
  Pose3 near{Vec3(0.2, 0, 0.5), 0.3 + 14 * kPi / 180};
  Pose3 far{Vec3(0.26, 0, 0.5), 0.3};
  CHECK(pose_matches(lib.shape(0), near, gt, tol));
  CHECK_FALSE(position_matches(lib.shape(0), far, gt, tol));
  Pose3 turned{gt.position, gt.yaw + kPi / 2};
  CHECK(rotation_matches(lib.shape(0), turned, gt, tol));
  CHECK_FALSE(rotation_matches(lib.shape(2), turned, gt, tol));
  Pose3 half{gt.position, gt.yaw + kPi};
  CHECK(rotation_matches(lib.shape(2), half, gt, tol));
  CHECK(rotation_matches(lib.shape(4), Pose3{gt.position, 2.0}, gt, tol));

  const Library& lego = builtin_library("lego");
  const BrickShape& plate = lego.shape(1);
  Pose3 g = to_world_pose(plate, {0, 0, 1, 0});
  Pose3 shifted = g;
  shifted.position.x() += 0.2;
  CHECK(position_matches(plate, shifted, g, tol));
  shifted.position.x() += 0.4;
  CHECK_FALSE(position_matches(plate, shifted, g, tol));
  CHECK_FALSE(rotation_matches(plate, to_world_pose(plate, {0, 0, 1, 1}), g, tol));
}

TEST_CASE("plan replay") {
  const Library& lib = builtin_library("clevr");
  Scene s = fixtures::clevr_scene({fixtures::brick_on(lib, 0, 0, 0, 0, 0), fixtures::brick_on(lib, 0, 1, 0, 0, 1)},
                                  {{0, 1}});
  PredictionSet p;
  p.predicted_count = 2;
  for (const auto& b : s.bricks) {
    BrickPrediction bp;
    bp.shape_id = b.shape_id;
    bp.texture_id = b.texture_id;
    bp.pose = b.pose;
    p.bricks.push_back(bp);
  }
  std::vector<int> identity{0, 1};
  auto ok = execute_plan(identity, p, s, lib, identity);
  CHECK(ok[0].correct);
  CHECK(ok[1].correct);

  std::vector<int> backwards{1, 0};
  auto bad = execute_plan(backwards, p, s, lib, identity);
  CHECK_FALSE(bad[0].correct);
  CHECK_FALSE(bad[0].type_correct);
  CHECK(bad[1].correct);

  p.bricks[1].pose->yaw += kPi / 2;
  CHECK(execute_plan(identity, p, s, lib, identity)[1].correct);
  p.bricks[1].pose->yaw += kPi / 9;
  auto off = execute_plan(identity, p, s, lib, identity);
  CHECK_FALSE(off[1].correct);
  CHECK(off[1].type_correct);

  std::vector<int> unmatched{0, -1};
  CHECK(execute_plan(identity, p, s, lib, unmatched)[1].gt == -1);
}

}  // TEST_SUITE
