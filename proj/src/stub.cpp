#include "brickasm/stub.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "brickasm/error.hpp"
#include "brickasm/rng.hpp"

namespace brickasm {

namespace {

void require(bool ok, const char* field) {
  if (!ok) throw Error(Errc::kInvalidArgument, std::string("noise config: bad value for ") + field);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Uniform pick among the library ids other than `current`.
template <typename Items>
int flip_label(const Items& items, int current, Rng& rng) {
  if (items.size() < 2) return current;
  std::uniform_int_distribution<std::size_t> pick(0, items.size() - 2);
  std::size_t k = pick(rng);
  std::size_t self = 0;
  while (self < items.size() && items[self].id != current) ++self;
  if (k >= self) ++k;
  return items[k].id;
}

}  // namespace

void NoiseConfig::validate() const {
  require(keypoint_sigma >= 0.0 && std::isfinite(keypoint_sigma), "keypoint_sigma");
  require(is_probability(label_flip_prob), "label_flip_prob");
  require(rotation_sigma >= 0.0 && std::isfinite(rotation_sigma), "rotation_sigma");
  require(is_probability(rotation_flip_prob), "rotation_flip_prob");
  require(mask_shift_px >= 0, "mask_shift_px");
  require(is_probability(count_error_prob), "count_error_prob");
  require(is_probability(drop_detection_prob), "drop_detection_prob");
}

NoiseConfig noise_preset(const std::string& name) {
  NoiseConfig c;
  if (name == "noiseless") return c;
  if (name == "mild") {
    c.keypoint_sigma = 0.005;
    c.label_flip_prob = 0.02;
    c.rotation_sigma = 0.05;
    c.rotation_flip_prob = 0.05;
    c.mask_shift_px = 2;
    c.count_error_prob = 0.02;
    c.drop_detection_prob = 0.02;
    return c;
  }
  if (name == "harsh") {
    c.keypoint_sigma = 0.02;
    c.label_flip_prob = 0.1;
    c.rotation_sigma = 0.2;
    c.rotation_flip_prob = 0.2;
    c.mask_shift_px = 6;
    c.count_error_prob = 0.1;
    c.drop_detection_prob = 0.1;
    return c;
  }
  throw Error(Errc::kInvalidArgument, "unknown noise preset: " + name);
}

Mask shift_mask(const Mask& mask, int dx, int dy) {
  if (dx == 0 && dy == 0) return mask;
  const int h = mask.height(), w = mask.width();
  const auto cells = mask.decode();
  std::vector<std::uint8_t> out(cells.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!cells[static_cast<std::size_t>(y) * w + x]) continue;
      const int nx = x + dx, ny = y + dy;
      if (nx >= 0 && nx < w && ny >= 0 && ny < h) out[static_cast<std::size_t>(ny) * w + nx] = 1;
    }
  return Mask::encode(out, h, w);
}

PredictionSet perturb(const Scene& scene, const Library& library, const NoiseConfig& cfg) {
  cfg.validate();
  if (!scene.annotated()) throw Error(Errc::kInvalidArgument, "perturb needs an annotated scene");
  Rng rng(derive_seed(cfg.seed, fnv1a(scene.name)));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> shift(-cfg.mask_shift_px, cfg.mask_shift_px);
  std::uniform_int_distribution<int> quarter(1, 3);
  const bool discrete = scene.style == "lego";

  PredictionSet out;
  out.scene = scene.name;
  for (std::size_t i = 0; i < scene.bricks.size(); ++i) {
    const BrickInstance& b = scene.bricks[i];
    BrickPrediction p;
    p.shape_id = unit(rng) < cfg.label_flip_prob ? flip_label(library.shapes, b.shape_id, rng) : b.shape_id;
    p.texture_id = unit(rng) < cfg.label_flip_prob ? flip_label(library.textures, b.texture_id, rng) : b.texture_id;
    for (const ViewAnnotation& a : scene.annotations.at(i)) {
      ViewPrediction v;
      const double nu = normal(rng) * cfg.keypoint_sigma;
      const double nv = normal(rng) * cfg.keypoint_sigma;
      if (a.keypoint) v.keypoint = Vec2(std::clamp(a.keypoint->x() + nu, 0.0, 1.0), std::clamp(a.keypoint->y() + nv, 0.0, 1.0));

      double rot = a.view_rotation;
      if (discrete) {
        if (unit(rng) < cfg.rotation_flip_prob) rot += quarter(rng) * (kPi / 2.0);
      } else {
        rot += normal(rng) * cfg.rotation_sigma;
      }
      v.rot_sin = std::sin(rot);
      v.rot_cos = std::cos(rot);

      const int dx = shift(rng);
      const int dy = shift(rng);
      v.mask = shift_mask(a.mask, dx, dy);
      v.confidence = mask_iou(v.mask, a.mask) * a.visible_ratio;

      if (unit(rng) < cfg.drop_detection_prob) {
        v.keypoint.reset();
        v.mask = Mask::empty(a.mask.height(), a.mask.width());
        v.confidence = 0.0;
      }
      p.views.push_back(std::move(v));
    }
    out.bricks.push_back(std::move(p));
  }

  out.predicted_count = static_cast<int>(out.bricks.size());
  if (unit(rng) < cfg.count_error_prob && !out.bricks.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, out.bricks.size() - 1);
    const std::size_t k = pick(rng);
    const bool remove = out.bricks.size() > 1 && unit(rng) < 0.5;
    if (remove) {
      out.bricks.erase(out.bricks.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
      out.bricks.push_back(out.bricks[k]);
    }
    out.predicted_count = static_cast<int>(out.bricks.size());
  }
  return out;
}

}  // namespace brickasm
