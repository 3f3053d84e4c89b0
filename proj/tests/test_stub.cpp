#include "doctest.h"

#include <cmath>

#include "brickasm/scenegen.hpp"
#include "brickasm/stub.hpp"
#include "fixtures.hpp"

using namespace brickasm;

namespace {

std::vector<Scene> annotated(const char* style, int count, std::uint64_t seed = 21) {
  const Library& lib = builtin_library(style);
  GenConfig cfg;
  cfg.style = style_from_string(style);
  cfg.seed = seed;
  std::vector<Scene> out;
  for (int i = 0; i < count; ++i) out.push_back(annotate(generate_scene(lib, cfg, i), lib));
  return out;
}

}  // namespace

TEST_SUITE("stub") {

TEST_CASE("zero noise reproduces the annotations") {
  for (const char* style : {"clevr", "lego"}) {
    const Library& lib = builtin_library(style);
    for (const Scene& s : annotated(style, 10)) {
      PredictionSet p = perturb(s, lib, noise_preset("noiseless"));
      CHECK(p.scene == s.name);
      CHECK(p.predicted_count == static_cast<int>(s.bricks.size()));
      REQUIRE(p.bricks.size() == s.bricks.size());
      for (std::size_t b = 0; b < s.bricks.size(); ++b) {
        CHECK(p.bricks[b].shape_id == s.bricks[b].shape_id);
        CHECK(p.bricks[b].texture_id == s.bricks[b].texture_id);
        CHECK_FALSE(p.bricks[b].pose);
        REQUIRE(p.bricks[b].views.size() == s.cameras.size());
        for (std::size_t v = 0; v < s.cameras.size(); ++v) {
          const auto& a = s.annotations[b][v];
          const auto& pv = p.bricks[b].views[v];
          CHECK(pv.keypoint.has_value() == a.keypoint.has_value());
          if (a.keypoint) CHECK(*pv.keypoint == *a.keypoint);
          CHECK(pv.mask == a.mask);
          CHECK(pv.confidence == a.visible_ratio);
          CHECK(angle_distance(pv.rotation(), a.view_rotation) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("label flips") {
  const Library& lib = builtin_library("clevr");
  NoiseConfig cfg;
  cfg.label_flip_prob = 1.0;
  for (const Scene& s : annotated("clevr", 10)) {
    PredictionSet p = perturb(s, lib, cfg);
    for (std::size_t b = 0; b < s.bricks.size(); ++b) {
      CHECK(p.bricks[b].shape_id != s.bricks[b].shape_id);
      CHECK(p.bricks[b].texture_id != s.bricks[b].texture_id);
      CHECK(lib.has_shape(p.bricks[b].shape_id));
      CHECK(lib.has_texture(p.bricks[b].texture_id));
    }
  }
}

TEST_CASE("keypoint noise tail") {
  const Library& lib = builtin_library("clevr");
  NoiseConfig cfg;
  cfg.keypoint_sigma = 0.01;
  long total = 0, inside = 0;
  for (const Scene& s : annotated("clevr", 400)) {
    PredictionSet p = perturb(s, lib, cfg);
    for (std::size_t b = 0; b < s.bricks.size(); ++b)
      for (std::size_t v = 0; v < s.cameras.size(); ++v) {
        const auto& a = s.annotations[b][v];
        if (!a.keypoint) continue;
        const Vec2 d = (*p.bricks[b].views[v].keypoint - *a.keypoint).cwiseAbs();
        for (int axis = 0; axis < 2; ++axis) {
          ++total;
          inside += d[axis] < 4 * cfg.keypoint_sigma;
        }
        CHECK(p.bricks[b].views[v].keypoint->minCoeff() >= 0.0);
        CHECK(p.bricks[b].views[v].keypoint->maxCoeff() <= 1.0);
      }
  }
  CHECK(total >= 10000);
  CHECK(static_cast<double>(inside) / total >= 0.99);
}

TEST_CASE("quarter-turn flips on stud-grid scenes") {
  const Library& lib = builtin_library("lego");
  NoiseConfig cfg;
  cfg.rotation_flip_prob = 1.0;
  cfg.rotation_sigma = 1.0;  // ignored for stud-grid scenes
  for (const Scene& s : annotated("lego", 10)) {
    PredictionSet p = perturb(s, lib, cfg);
    for (std::size_t b = 0; b < s.bricks.size(); ++b)
      for (std::size_t v = 0; v < s.cameras.size(); ++v) {
        const double d = angle_distance(p.bricks[b].views[v].rotation(), s.annotations[b][v].view_rotation);
        CHECK(d > 1.0);
        CHECK(angle_distance(d, 0.0, kPi / 2) < 1e-9);
      }
  }
}

TEST_CASE("drops, count errors and confidence bounds") {
  const Library& lib = builtin_library("clevr");
  NoiseConfig drop;
  drop.drop_detection_prob = 1.0;
  NoiseConfig count;
  count.count_error_prob = 1.0;
  NoiseConfig harsh = noise_preset("harsh");
  for (const Scene& s : annotated("clevr", 20)) {
    for (const auto& b : perturb(s, lib, drop).bricks)
      for (const auto& v : b.views) {
        CHECK_FALSE(v.keypoint);
        CHECK(v.confidence == 0.0);
        CHECK(v.mask.count() == 0);
      }
    PredictionSet c = perturb(s, lib, count);
    CHECK(std::abs(c.predicted_count - static_cast<int>(s.bricks.size())) == 1);
    CHECK(c.predicted_count == static_cast<int>(c.bricks.size()));

    PredictionSet h = perturb(s, lib, harsh);
    for (std::size_t b = 0; b < h.bricks.size() && b < s.bricks.size(); ++b)
      for (std::size_t v = 0; v < h.bricks[b].views.size(); ++v) {
        const double conf = h.bricks[b].views[v].confidence;
        CHECK(conf >= 0.0);
        CHECK(conf <= 1.0);
      }
  }
}

TEST_CASE("confidence reaches 1 only for an exact, fully visible mask") {
  const Library& lib = builtin_library("clevr");
  NoiseConfig cfg = noise_preset("mild");
  cfg.drop_detection_prob = 0.0;
  cfg.count_error_prob = 0.0;
  for (const Scene& s : annotated("clevr", 20)) {
    PredictionSet p = perturb(s, lib, cfg);
    for (std::size_t b = 0; b < s.bricks.size(); ++b)
      for (std::size_t v = 0; v < s.cameras.size(); ++v) {
        const auto& pv = p.bricks[b].views[v];
        const auto& a = s.annotations[b][v];
        if (pv.confidence == 1.0) {
          CHECK(pv.mask == a.mask);
          CHECK(a.visible_ratio == 1.0);
        }
        CHECK(pv.confidence == doctest::Approx(mask_iou(pv.mask, a.mask) * a.visible_ratio));
      }
  }
}

TEST_CASE("determinism") {
  const Library& lib = builtin_library("clevr");
  NoiseConfig cfg = noise_preset("harsh");
  cfg.seed = 9;
  for (const Scene& s : annotated("clevr", 5)) {
    PredictionSet a = perturb(s, lib, cfg), b = perturb(s, lib, cfg);
    REQUIRE(a.bricks.size() == b.bricks.size());
    for (std::size_t i = 0; i < a.bricks.size(); ++i)
      for (std::size_t v = 0; v < a.bricks[i].views.size(); ++v) {
        CHECK(a.bricks[i].views[v].keypoint == b.bricks[i].views[v].keypoint);
        CHECK(a.bricks[i].views[v].rot_sin == b.bricks[i].views[v].rot_sin);
        CHECK(a.bricks[i].views[v].mask == b.bricks[i].views[v].mask);
      }
    cfg.seed = 10;
    PredictionSet c = perturb(s, lib, cfg);
    cfg.seed = 9;
    bool differs = c.bricks.size() != a.bricks.size();
    for (std::size_t i = 0; !differs && i < a.bricks.size(); ++i)
      differs = c.bricks[i].views[0].rot_sin != a.bricks[i].views[0].rot_sin;
    CHECK(differs);
  }
}

TEST_CASE("mask shifting") {
  Mask m = Mask::encode({0, 0, 0, 0, 1, 0, 0, 0, 0}, 3, 3);
  CHECK(shift_mask(m, 1, 0).decode() == std::vector<std::uint8_t>{0, 0, 0, 0, 0, 1, 0, 0, 0});
  CHECK(shift_mask(m, 0, -1).decode() == std::vector<std::uint8_t>{0, 1, 0, 0, 0, 0, 0, 0, 0});
  CHECK(shift_mask(m, 2, 0).count() == 0);
  CHECK(shift_mask(m, 0, 0) == m);
}

TEST_CASE("presets and validation") {
  NoiseConfig quiet = noise_preset("noiseless");
  CHECK(quiet.keypoint_sigma == 0.0);
  CHECK(quiet.drop_detection_prob == 0.0);
  CHECK(noise_preset("mild").keypoint_sigma < noise_preset("harsh").keypoint_sigma);
  CHECK(fixtures::throws_code([] { noise_preset("loud"); }, Errc::kInvalidArgument));
  NoiseConfig bad;
  bad.label_flip_prob = 1.5;
  CHECK(fixtures::throws_code([&] { bad.validate(); }, Errc::kInvalidArgument));
  bad = NoiseConfig{};
  bad.keypoint_sigma = -1;
  CHECK(fixtures::throws_code([&] { bad.validate(); }, Errc::kInvalidArgument));
  bad = NoiseConfig{};
  bad.mask_shift_px = -2;
  CHECK(fixtures::throws_code([&] { bad.validate(); }, Errc::kInvalidArgument));
}

}  // TEST_SUITE
