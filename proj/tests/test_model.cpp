#include "doctest.h"

#include <random>

#include "brickasm/error.hpp"
#include "brickasm/model.hpp"
#include "fixtures.hpp"

using namespace brickasm;

namespace {

int count_kind(const std::vector<Violation>& v, ViolationKind k) {
  int n = 0;
  for (const auto& x : v) n += x.kind == k;
  return n;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("single ground cube is valid") {
  const Library& lib = builtin_library("clevr");
  Scene s = fixtures::clevr_scene({fixtures::brick_on(lib, 0, 0, 0, 0, 0)}, {});
  CHECK(validate_scene(s, lib).empty());
}

TEST_CASE("edge pointing backwards in placement order") {
  const Library& lib = builtin_library("clevr");
  Scene s = fixtures::clevr_scene(
      {fixtures::brick_on(lib, 0, 0, 0, 0, 0), fixtures::brick_on(lib, 0, 1, 2, 0, 0)}, {{1, 0}});
  auto v = validate_scene(s, lib);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::kOrdering);
  CHECK(v[0].subject == "edge (1,0)");
}

TEST_CASE("support cycle gives one acyclicity violation") {
  const Library& lib = builtin_library("clevr");
  Scene s = fixtures::clevr_scene(
      {fixtures::brick_on(lib, 0, 0, 0, 0, 0), fixtures::brick_on(lib, 0, 1, 0, 0, 1)}, {{0, 1}, {1, 0}});
  auto v = validate_scene(s, lib);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::kCycle);
}

TEST_CASE("other violations are named") {
  const Library& lib = builtin_library("clevr");
  Scene s = fixtures::clevr_scene({fixtures::brick_on(lib, 0, 99, 0, 0, 0.5, 7.0)}, {{0, 3}, {0, 0}});
  Camera bad;
  bad.rotation(0, 0) = 2.0;
  s.cameras.push_back(bad);
  auto v = validate_scene(s, lib);
  CHECK(count_kind(v, ViolationKind::kUnknownTexture) == 1);
  CHECK(count_kind(v, ViolationKind::kYawRange) == 1);
  CHECK(count_kind(v, ViolationKind::kEdgeIndex) == 1);
  CHECK(count_kind(v, ViolationKind::kSelfLoop) == 1);
  CHECK(count_kind(v, ViolationKind::kUnsupported) == 1);
  CHECK(count_kind(v, ViolationKind::kCamera) == 1);
}

TEST_CASE("annotation table must match cameras") {
  const Library& lib = builtin_library("clevr");
  Scene s = fixtures::clevr_scene({fixtures::brick_on(lib, 0, 0, 0, 0, 0)}, {});
  s.cameras.resize(2);
  s.annotations = {{ViewAnnotation{}}};
  CHECK(count_kind(validate_scene(s, lib), ViolationKind::kAnnotation) == 1);
  ViewAnnotation a;
  a.mask = Mask::empty(4, 4);
  a.visible_ratio = 1.5;
  s.annotations = {{a, a}};
  CHECK(count_kind(validate_scene(s, lib), ViolationKind::kAnnotation) == 2);
}

TEST_CASE("angles") {
  CHECK(wrap_angle(-kPi / 2) == doctest::Approx(1.5 * kPi));
  CHECK(wrap_angle(kTwoPi) == doctest::Approx(0.0));
  CHECK(angle_distance(0.1, kTwoPi - 0.1) == doctest::Approx(0.2));
  CHECK(angle_distance(0.0, kPi / 2, kPi / 2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(symmetry_period(Symmetry::kFour) == doctest::Approx(kPi / 2));
  CHECK(symmetry_period(Symmetry::kContinuous) == 0.0);
}

TEST_CASE("mask run-length encoding") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = 1 + trial % 9, w = 1 + trial % 7;
    std::vector<std::uint8_t> cells(h * w);
    for (auto& c : cells) c = rng() % 3 == 0;
    Mask m = Mask::encode(cells, h, w);
    CHECK(m.decodes_exactly());
    CHECK(m.decode() == cells);
    std::size_t set = 0;
    for (auto c : cells) set += c;
    CHECK(m.count() == set);
  }
  Mask a = Mask::encode({1, 1, 0, 0}, 2, 2);
  Mask b = Mask::encode({0, 1, 1, 0}, 2, 2);
  CHECK(a.runs() == std::vector<std::uint32_t>{0, 2, 2});
  CHECK(mask_iou(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(mask_iou(Mask::empty(2, 2), Mask::empty(2, 2)) == 1.0);
  CHECK_FALSE(Mask(2, 2, {1, 1}).decodes_exactly());
}

TEST_CASE("graph helpers") {
  CHECK(find_cycle(3, {{0, 1}, {1, 2}}).empty());
  auto c = find_cycle(3, {{0, 1}, {1, 2}, {2, 1}});
  CHECK(c.size() >= 2);
  CHECK(longest_path_vertices(3, {{0, 1}, {1, 2}}) == 3);
  CHECK(longest_path_vertices(3, {}) == 1);
  CHECK(longest_path_vertices(0, {}) == 0);
}

TEST_CASE("built-in libraries") {
  const Library& clevr = builtin_library("clevr");
  const Library& lego = builtin_library("lego");
  CHECK(clevr.shapes.size() == 6);
  CHECK(clevr.textures.size() == 16);
  CHECK(lego.shapes.size() == 12);
  CHECK(lego.textures.size() == 8);
  CHECK(validate_library(clevr).empty());
  CHECK(validate_library(lego).empty());
  for (const auto& s : lego.shapes) CHECK(s.is_grid_shape());
  for (const auto& s : clevr.shapes) {
    CHECK_FALSE(s.is_grid_shape());
    CHECK(s.point_cloud.size() == static_cast<std::size_t>(kPointCloudSize));
  }
  CHECK(lego_layer_height() == doctest::Approx(1.2));
  CHECK(fixtures::throws_code([] { builtin_library("duplo"); }, Errc::kInvalidArgument));
}

}  // TEST_SUITE
