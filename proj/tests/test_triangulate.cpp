#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "brickasm/stub.hpp"
#include "brickasm/triangulate.hpp"
#include "fixtures.hpp"

using namespace brickasm;

namespace {

Ray ray(Vec3 o, Vec3 d) { return Ray{o, d.normalized()}; }

double h_direct(const Vec3& z, const std::vector<Ray>& rays) {
  double s = 0.0;
  for (const auto& r : rays) {
    const Vec3 w = z - r.origin;
    s += (w - w.dot(r.direction) * r.direction).norm();
  }
  return s;
}

// Dense grid over [0,2]^3 followed by repeated local grids at ten times finer spacing.
Vec3 grid_search(const std::vector<Ray>& rays) {
  double step = 0.02;
  Vec3 best(0, 0, 0);
  double best_h = h_direct(best, rays);
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 100; ++j)
      for (int k = 0; k <= 100; ++k) {
        const Vec3 z(i * step, j * step, k * step);
        const double v = h_direct(z, rays);
        if (v < best_h) {
          best_h = v;
          best = z;
        }
      }
  while (step > 1e-9) {
    const Vec3 centre = best;
    const double fine = step / 10.0;
    for (int i = -20; i <= 20; ++i)
      for (int j = -20; j <= 20; ++j)
        for (int k = -20; k <= 20; ++k) {
          const Vec3 z = centre + fine * Vec3(i, j, k);
          const double v = h_direct(z, rays);
          if (v < best_h) {
            best_h = v;
            best = z;
          }
        }
    step = fine;
  }
  return best;
}

Camera camera_at_azimuth(double deg) {
  const double a = deg * kPi / 180.0;
  return look_at(Vec3(10 * std::cos(a), 10 * std::sin(a), 4), Vec3::Zero());
}

ViewRotation rot_deg(double deg) { return {std::sin(deg * kPi / 180), std::cos(deg * kPi / 180)}; }

}  // namespace

TEST_SUITE("triangulate") {

TEST_CASE("view selection") {
  std::vector<double> c{0.7, 0.5, 0.9, 0.66};
  CHECK(select_views(c) == std::vector<int>{0, 2});
  CHECK(select_views(std::vector<double>{0, 0, 0}).empty());
  CHECK(select_views(std::vector<double>{0.5, 0.5}, 0.0) == std::vector<int>{0, 1});
}

TEST_CASE("exact intersection") {
  std::vector<Ray> rays{ray({0, 2, 3}, {1, 0, 0}), ray({1, 0, 3}, {0, 1, 0})};
  auto r = triangulate(rays);
  CHECK((r.position - Vec3(1, 2, 3)).norm() < 1e-9);
  CHECK(r.residual < 1e-9);
}

TEST_CASE("degenerate inputs") {
  std::vector<Ray> parallel{ray({0, 0, 0}, {0, 0, 1}), ray({1, 0, 0}, {0, 0, 1})};
  CHECK(fixtures::throws_code([&] { triangulate(parallel); }, Errc::kDegenerateGeometry));
  std::vector<Ray> close{ray({0, 0, 0}, {0, 0, 1}), ray({1, 0, 0}, {std::tan(4.0 * kPi / 180), 0, 1})};
  CHECK(fixtures::throws_code([&] { triangulate(close); }, Errc::kDegenerateGeometry));
  std::vector<Ray> one{ray({0, 0, 0}, {0, 0, 1})};
  CHECK(fixtures::throws_code([&] { triangulate(one); }, Errc::kInsufficientViews));
}

TEST_CASE("three skew rays match a grid search") {
  std::vector<Ray> rays{ray({0, 1.05, 1}, {1, 0, 0}), ray({1, 0, 0.95}, {0, 1, 0}), ray({0.95, 1, 0}, {0, 0, 1})};
  auto r = triangulate(rays);
  const Vec3 oracle = grid_search(rays);
  CHECK((r.position - oracle).norm() < 1e-3);
  CHECK(r.residual <= r.initial_residual);
  CHECK(r.residual == doctest::Approx(h_direct(r.position, rays)).epsilon(1e-12));
  CHECK(r.residual <= h_direct(oracle, rays) + 1e-9);
  CHECK(r.gradient_norm < 1e-8);
}

TEST_CASE("smoothed gradient against central differences") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  const double delta = 1e-6, step = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Ray> rays;
    const int k = 2 + trial % 4;
    for (int i = 0; i < k; ++i) rays.push_back(ray({n(rng), n(rng), n(rng)}, {n(rng), n(rng), n(rng)}));
    const Vec3 z(n(rng), n(rng), n(rng));
    const Vec3 g = smoothed_gradient(z, rays, delta);
    Vec3 fd;
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e[a] = step;
      fd[a] = (smoothed_objective(z + e, rays, delta) - smoothed_objective(z - e, rays, delta)) / (2 * step);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(fd.norm(), 1e-12));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("descent never increases the smoothed objective") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Ray> rays;
    for (int i = 0; i < 4; ++i) rays.push_back(ray({n(rng), n(rng), n(rng)}, {n(rng), n(rng), n(rng)}));
    auto r = triangulate(rays);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
    CHECK(r.residual <= r.initial_residual);
    CHECK(r.initial == least_squares_point(rays));
  }
}

TEST_CASE("position recovery from noiseless annotations") {
  for (const char* style : {"clevr", "lego"}) {
    const Library& lib = builtin_library(style);
    GenConfig cfg;
    cfg.style = style_from_string(style);
    cfg.seed = 5;
    int checked = 0;
    for (int i = 0; i < 20; ++i) {
      Scene s = annotate(generate_scene(lib, cfg, i), lib);
      PredictionSet p = perturb(s, lib, NoiseConfig{});
      for (std::size_t b = 0; b < s.bricks.size(); ++b) {
        std::vector<double> conf;
        for (const auto& v : p.bricks[b].views) conf.push_back(v.confidence);
        if (select_views(conf).size() < 2) continue;
        auto r = recover_position(p.bricks[b], s.cameras);
        CHECK_FALSE(r.low_quality);
        CHECK((r.position - s.bricks[b].pose.position).norm() < 1e-3);
        ++checked;
      }
    }
    CHECK(checked > 100);
  }
}

TEST_CASE("recovery fallbacks") {
  const Library& lib = builtin_library("clevr");
  GenConfig cfg;
  cfg.min_bricks = cfg.max_bricks = 1;
  Scene s = annotate(generate_scene(lib, cfg, 0), lib);
  PredictionSet p = perturb(s, lib, NoiseConfig{});
  BrickPrediction b = p.bricks[0];

  const double c[] = {1, 0, 0, 0};
  for (int v = 0; v < 4; ++v) b.views[v].confidence = c[v];
  auto r = recover_position(b, s.cameras);
  CHECK(r.low_quality);
  CHECK(r.views == std::vector<int>{0});
  const Ray r0 = keypoint_ray(s.cameras[0], *b.views[0].keypoint);
  CHECK(point_ray_distance(r.position, r0) < 1e-9);
  CHECK((r.position - r0.origin).dot(r0.direction) == doctest::Approx((-r0.origin).dot(r0.direction)));

  const double low[] = {0.5, 0.4, 0.0, 0.9};
  for (int v = 0; v < 4; ++v) b.views[v].confidence = low[v];
  r = recover_position(b, s.cameras);
  CHECK(r.low_quality);
  CHECK(r.views == std::vector<int>{0, 1, 3});
  CHECK((r.position - s.bricks[0].pose.position).norm() < 1e-3);

  for (auto& v : b.views) v.confidence = 0.0;
  CHECK(fixtures::throws_code([&] { recover_position(b, s.cameras); }, Errc::kNoVisibleViews));
}

TEST_CASE("continuous rotation merge") {
  std::vector<Camera> cams{camera_at_azimuth(0), camera_at_azimuth(0)};
  std::vector<ViewRotation> same{rot_deg(42), rot_deg(42)};
  std::vector<double> equal{1, 1};
  CHECK(merge_rotation_continuous(same, equal, cams) * 180 / kPi == doctest::Approx(42.0));
  std::vector<ViewRotation> wrap{rot_deg(359), rot_deg(1)};
  CHECK(angle_distance(merge_rotation_continuous(wrap, equal, cams), 0.0) < 1e-12);
  std::vector<ViewRotation> pair{rot_deg(10), rot_deg(20)};
  std::vector<double> weights{0.25, 0.75};
  const double r = kPi / 180;
  const double expected = std::atan2(std::sin(10 * r) + 3 * std::sin(20 * r), std::cos(10 * r) + 3 * std::cos(20 * r));
  CHECK(merge_rotation_continuous(pair, weights, cams, 0.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected / r == doctest::Approx(17.5048).epsilon(1e-5));

  // View rotations are relative to each camera's azimuth.
  std::vector<Camera> around{camera_at_azimuth(30), camera_at_azimuth(120)};
  std::vector<ViewRotation> rel{rot_deg(70 - 30), rot_deg(70 - 120)};
  CHECK(merge_rotation_continuous(rel, equal, around) / r == doctest::Approx(70.0));

  std::vector<double> none{0, 0};
  CHECK(fixtures::throws_code([&] { merge_rotation_continuous(same, none, cams); }, Errc::kNoVisibleViews));
}

TEST_CASE("discrete rotation vote") {
  std::vector<Camera> cams(3, camera_at_azimuth(0));
  std::vector<ViewRotation> votes{rot_deg(90), rot_deg(90), rot_deg(180)};
  std::vector<double> equal{1, 1, 1};
  CHECK(merge_rotation_discrete(votes, equal, cams) == doctest::Approx(kPi / 2));
  std::vector<Camera> two(2, camera_at_azimuth(0));
  std::vector<ViewRotation> split{rot_deg(0), rot_deg(90)};
  std::vector<double> weighted{0.9, 0.2};
  CHECK(merge_rotation_discrete(split, weighted, two, 0.0) == 0.0);
  std::vector<double> tie{1, 1};
  CHECK(merge_rotation_discrete(split, tie, two) == 0.0);
  std::vector<ViewRotation> neg{rot_deg(-88), rot_deg(-91)};
  CHECK(merge_rotation_discrete(neg, tie, two) == doctest::Approx(1.5 * kPi));
}

TEST_CASE("snapping to the stud grid") {
  const Library& lib = builtin_library("lego");
  const BrickShape& base = lib.shape(5);  // 2x2
  const BrickShape& plate = lib.shape(1);  // 1x2
  AssemblyState state;
  CHECK(fixtures::throws_code([&] { snap_to_connection(Vec3::Zero(), 0.0, state, plate); }, Errc::kNoFeasiblePose));
  state.place(base, {0, 0, 0, 0});
  for (const DiscretePose& p : feasible_poses(state, plate)) {
    const Pose3 w = to_world_pose(plate, p);
    CHECK(snap_to_connection(w.position, w.yaw, state, plate) == p);
    std::mt19937_64 rng(p.x * 31 + p.y * 7 + p.rot);
    std::uniform_real_distribution<double> angle(0, kTwoPi);
    const double a = angle(rng);
    const Vec3 off(0.3 * std::cos(a), 0.3 * std::sin(a), 0.0);
    CHECK(snap_to_connection(w.position + off, w.yaw, state, plate) == p);
  }
}

}  // TEST_SUITE
