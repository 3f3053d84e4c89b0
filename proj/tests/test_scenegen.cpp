#include "doctest.h"

#include <cmath>
#include <set>

#include "brickasm/scenegen.hpp"
#include "fixtures.hpp"

using namespace brickasm;

namespace {

using CellSet = std::set<std::tuple<int, int, int>>;

// Brute force over every min corner and quarter turn on layer `layer`; poses
// are identified by the set of cells they cover, which folds symmetric turns.
std::set<CellSet> enumerate_placements(const std::set<std::tuple<int, int, int>>& occupied,
                                       const std::set<std::tuple<int, int, int>>& studs, int sx, int sy, int layer) {
  std::set<CellSet> out;
  for (int rot = 0; rot < 4; ++rot) {
    const int ex = rot % 2 ? sy : sx, ey = rot % 2 ? sx : sy;
    for (int x = -3; x + ex <= 3; ++x) {
      for (int y = -3; y + ey <= 3; ++y) {
        CellSet cells;
        bool mates = false, blocked = false;
        for (int i = 0; i < ex; ++i) {
          for (int j = 0; j < ey; ++j) {
            cells.insert({x + i, y + j, layer});
            mates |= studs.count({x + i, y + j, layer - 1}) > 0;
            blocked |= occupied.count({x + i, y + j, layer}) > 0;
          }
        }
        if (mates && !blocked) out.insert(cells);
      }
    }
  }
  return out;
}

std::set<CellSet> as_cell_sets(const std::vector<DiscretePose>& poses, const BrickShape& shape) {
  std::set<CellSet> out;
  for (const auto& p : poses) {
    CellSet cells;
    for (const auto& c : footprint_cells(shape, p)) cells.insert({c.x, c.y, c.layer});
    out.insert(cells);
  }
  return out;
}

const BrickShape& lego_shape(int x, int y) {
  for (const auto& s : builtin_library("lego").shapes) {
    const auto e = s.grid_extent();
    if (e.x == x && e.y == y) return s;
  }
  throw std::runtime_error("no such brick");
}

}  // namespace

TEST_SUITE("scenegen") {

TEST_CASE("stability of a cube on a cube") {
  const Library& lib = builtin_library("clevr");
  std::vector<BrickInstance> placed{fixtures::brick_on(lib, 0, 0, 0, 0, 0)};
  CHECK(stability_check({}, lib, placed[0]));
  CHECK_FALSE(stability_check(placed, lib, fixtures::brick_on(lib, 0, 1, 0.6, 0, 1)));
  CHECK(stability_check(placed, lib, fixtures::brick_on(lib, 0, 1, 0.3, 0, 1)));
  // Contact region x in [0.1, 0.5]: the edge itself still counts as inside.
  CHECK(stability_check(placed, lib, fixtures::brick_on(lib, 0, 1, 0.5, 0, 1)));
}

TEST_CASE("nothing rests on a ridge") {
  const Library& lib = builtin_library("clevr");
  std::vector<BrickInstance> placed{fixtures::brick_on(lib, 5, 0, 0, 0, 0)};
  Settling s = settle(placed, lib, lib.shape(0), 0, 0, 0);
  CHECK(s.bottom == doctest::Approx(lib.shape(5).height));
  CHECK(s.supporters == std::vector<int>{0});
  CHECK_FALSE(stability_check(placed, lib, fixtures::brick_on(lib, 0, 1, 0, 0, s.bottom)));
}

TEST_CASE("settling finds the highest overlapping top") {
  const Library& lib = builtin_library("clevr");
  std::vector<BrickInstance> placed{fixtures::brick_on(lib, 0, 0, -0.5, 0, 0), fixtures::brick_on(lib, 0, 0, 0.5, 0, 0),
                                    fixtures::brick_on(lib, 1, 0, 3, 0, 0)};
  Settling s = settle(placed, lib, lib.shape(2), 0, 0, 0);
  CHECK(s.bottom == doctest::Approx(1.0));
  CHECK(s.supporters == std::vector<int>{0, 1});
  CHECK(settle(placed, lib, lib.shape(0), -2.5, -2.5, 0.3).bottom == 0.0);
}

TEST_CASE("polygon helpers") {
  std::vector<Vec2> a{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  std::vector<Vec2> b{{1, 1}, {3, 1}, {3, 3}, {1, 3}};
  CHECK(polygon_area(clip_convex(a, b)) == doctest::Approx(1.0));
  CHECK(clip_convex(a, {{5, 5}, {6, 5}, {6, 6}}).empty());
  auto hull = convex_hull({{0, 0}, {1, 0}, {2, 0}, {1, 1}, {0.5, 0.2}});
  CHECK(hull.size() == 3);
  CHECK(polygon_area(hull) == doctest::Approx(1.0));
}

TEST_CASE("single brick scenes") {
  for (Style style : {Style::kClevr, Style::kLego}) {
    const Library& lib = builtin_library(to_string(style));
    GenConfig cfg;
    cfg.style = style;
    cfg.min_bricks = cfg.max_bricks = 1;
    for (int i = 0; i < 20; ++i) {
      Scene s = generate_scene(lib, cfg, i);
      REQUIRE(s.bricks.size() == 1);
      CHECK(s.support_edges.empty());
      CHECK(s.bricks[0].pose.position.z() == doctest::Approx(lib.shape(s.bricks[0].shape_id).height / 2));
    }
  }
}

TEST_CASE("feasible poses on a 2x2 base") {
  const BrickShape& base = lego_shape(2, 2);
  AssemblyState state;
  CHECK(feasible_poses(state, lego_shape(1, 1)).empty());
  state.place(base, {0, 0, 0, 0});
  CHECK(state.studs.size() == 4);
  CHECK(feasible_poses(state, lego_shape(1, 1)).size() == 4);

  std::set<std::tuple<int, int, int>> occupied, studs;
  for (const auto& [c, i] : state.occupied) occupied.insert({c.x, c.y, c.layer});
  for (const auto& c : state.studs) studs.insert({c.x, c.y, c.layer});
  for (const auto& shape : builtin_library("lego").shapes) {
    const auto e = shape.grid_extent();
    auto got = feasible_poses(state, shape);
    std::set<DiscretePose> unique(got.begin(), got.end());
    CHECK(unique.size() == got.size());
    CHECK(as_cell_sets(got, shape) == enumerate_placements(occupied, studs, e.x, e.y, 1));
    CHECK(as_cell_sets(got, shape).size() == got.size());
  }

  AssemblyState covered = state;
  covered.place(base, {0, 0, 1, 0});
  for (const auto& p : feasible_poses(covered, lego_shape(1, 1))) CHECK(p.layer == 2);
  covered.studs.clear();
  CHECK(feasible_poses(covered, lego_shape(1, 1)).empty());
}

TEST_CASE("grid pose conversion round-trips") {
  for (const auto& shape : builtin_library("lego").shapes) {
    for (int rot : canonical_rotations(shape)) {
      DiscretePose p{-2, 1, 3, rot};
      CHECK(to_discrete_pose(shape, to_world_pose(shape, p)) == p);
    }
  }
}

TEST_CASE("generated clevr scenes") {
  const Library& lib = builtin_library("clevr");
  GenConfig cfg;
  cfg.seed = 4242;
  for (int i = 0; i < 60; ++i) {
    Scene s = generate_scene(lib, cfg, i);
    CHECK(validate_scene(s, lib).empty());
    CHECK(s.bricks.size() >= 4);
    CHECK(s.bricks.size() <= 11);
    CHECK(s.cameras.size() == 4);
    for (std::size_t b = 0; b < s.bricks.size(); ++b) {
      for (const Vec2& p : world_footprint(lib.shape(s.bricks[b].shape_id), s.bricks[b].pose)) {
        CHECK(p.cwiseAbs().maxCoeff() <= 3.0 + 1e-12);
      }
      std::span<const BrickInstance> prefix(s.bricks.data(), b);
      CHECK(stability_check(prefix, lib, s.bricks[b]));
      Settling st = settle(prefix, lib, lib.shape(s.bricks[b].shape_id), s.bricks[b].pose.position.x(),
                           s.bricks[b].pose.position.y(), s.bricks[b].pose.yaw);
      std::vector<int> incoming;
      for (const Edge& e : s.support_edges)
        if (e.to == static_cast<int>(b)) incoming.push_back(e.from);
      CHECK(incoming == st.supporters);
    }
    Scene again = generate_scene(lib, cfg, i);
    REQUIRE(again.bricks.size() == s.bricks.size());
    for (std::size_t b = 0; b < s.bricks.size(); ++b) {
      CHECK(again.bricks[b].pose.position == s.bricks[b].pose.position);
      CHECK(again.bricks[b].pose.yaw == s.bricks[b].pose.yaw);
    }
  }
}

TEST_CASE("generated lego scenes") {
  const Library& lib = builtin_library("lego");
  GenConfig cfg;
  cfg.style = Style::kLego;
  cfg.seed = 77;
  const double h = lego_layer_height();
  for (int i = 0; i < 60; ++i) {
    Scene s = generate_scene(lib, cfg, i);
    CHECK(validate_scene(s, lib).empty());
    std::set<GridCell> cells;
    std::size_t total = 0;
    std::vector<int> layer;
    for (const auto& b : s.bricks) {
      const BrickShape& shape = lib.shape(b.shape_id);
      const double quarter = b.pose.yaw / (kPi / 2);
      CHECK(std::abs(quarter - std::round(quarter)) < 1e-12);
      DiscretePose d = to_discrete_pose(shape, b.pose);
      CHECK(std::abs(b.pose.position.z() - (d.layer * h + h / 2)) < 1e-12);
      layer.push_back(d.layer);
      for (const auto& c : footprint_cells(shape, d)) {
        cells.insert(c);
        ++total;
      }
    }
    CHECK(cells.size() == total);
    CHECK(layer[0] == 0);
    std::vector<int> supported(s.bricks.size(), 0);
    for (const Edge& e : s.support_edges) {
      CHECK(layer[e.to] == layer[e.from] + 1);
      supported[e.to] = 1;
    }
    for (std::size_t b = 1; b < s.bricks.size(); ++b) CHECK(supported[b]);
  }
}

TEST_CASE("annotation") {
  const Library& lib = builtin_library("clevr");
  GenConfig cfg;
  cfg.min_bricks = cfg.max_bricks = 1;
  Scene s = annotate(generate_scene(lib, cfg, 3), lib);
  REQUIRE(s.annotations.size() == 1);
  REQUIRE(s.annotations[0].size() == 4);
  for (std::size_t v = 0; v < 4; ++v) {
    const auto& a = s.annotations[0][v];
    Projection p = project(s.cameras[v], s.bricks[0].pose.position);
    REQUIRE(a.keypoint);
    CHECK(std::abs(a.keypoint->x() - p.u) < 1e-9);
    CHECK(std::abs(a.keypoint->y() - p.v) < 1e-9);
    CHECK(a.visible_ratio == 1.0);
    CHECK(a.gt_confidence == 1.0);
  }

  cfg.min_bricks = 4;
  cfg.max_bricks = 11;
  int hidden = 0;
  for (int i = 0; i < 30; ++i) {
    Scene t = annotate(generate_scene(lib, cfg, i), lib);
    CHECK(validate_scene(t, lib).empty());
    for (const auto& row : t.annotations) {
      for (const auto& a : row) {
        CHECK(a.gt_confidence == a.visible_ratio);
        hidden += a.visible_ratio < 0.05;
      }
    }
  }
  CHECK(hidden > 0);
}

TEST_CASE("dataset statistics") {
  const Library& lib = builtin_library("clevr");
  Scene tower = fixtures::clevr_scene({fixtures::brick_on(lib, 0, 0, 0, 0, 0), fixtures::brick_on(lib, 0, 0, 0, 0, 1),
                                       fixtures::brick_on(lib, 0, 0, 0, 0, 2)},
                                      {{0, 1}, {1, 2}});
  Scene flat = fixtures::clevr_scene({fixtures::brick_on(lib, 0, 0, -2, 0, 0), fixtures::brick_on(lib, 0, 0, 0, 0, 0),
                                      fixtures::brick_on(lib, 0, 0, 2, 0, 0)},
                                     {});
  CHECK(dataset_stats(std::vector<Scene>{tower}).mean_depth == 3.0);
  CHECK(dataset_stats(std::vector<Scene>{flat}).mean_depth == 1.0);
  DatasetStats both = dataset_stats(std::vector<Scene>{tower, flat});
  CHECK(both.mean_depth == 2.0);
  CHECK(both.mean_bricks == 3.0);
  CHECK(fixtures::throws_code([] { dataset_stats(std::vector<Scene>{}); }, Errc::kEmptyDataset));
}

TEST_CASE("config validation") {
  GenConfig cfg;
  cfg.min_bricks = 5;
  cfg.max_bricks = 4;
  CHECK(fixtures::throws_code([&] { cfg.validate(); }, Errc::kInvalidArgument));
  cfg = GenConfig{};
  cfg.area_max = cfg.area_min;
  CHECK(fixtures::throws_code([&] { cfg.validate(); }, Errc::kInvalidArgument));
  CHECK(fixtures::throws_code([] { style_from_string("duplo"); }, Errc::kInvalidArgument));
}

}  // TEST_SUITE
