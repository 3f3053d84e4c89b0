#include <cmath>
#include <random>

#include "brickasm/error.hpp"
#include "brickasm/model.hpp"
#include "brickasm/rng.hpp"

namespace brickasm {

namespace {

constexpr double kLegoLayerHeight = 1.2;

std::vector<Vec2> rectangle(double sx, double sy) {
  return {{-sx / 2, -sy / 2}, {sx / 2, -sy / 2}, {sx / 2, sy / 2}, {-sx / 2, sy / 2}};
}

std::vector<Vec2> disc(double radius, int sides) {
  std::vector<Vec2> out;
  for (int k = 0; k < sides; ++k) {
    const double a = kTwoPi * k / sides;
    out.emplace_back(radius * std::cos(a), radius * std::sin(a));
  }
  return out;
}

bool inside_convex(const std::vector<Vec2>& poly, const Vec2& p) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    if (cross < 0.0) return false;
  }
  return true;
}

// Rejection-samples kPointCloudSize points uniformly inside the solid.
std::vector<Vec3> sample_volume(const BrickShape& shape, std::uint64_t seed) {
  Rng rng(seed);
  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  for (const Vec2& p : shape.footprint) {
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_y = std::min(min_y, p.y());
    max_y = std::max(max_y, p.y());
  }
  std::uniform_real_distribution<double> ux(min_x, max_x), uy(min_y, max_y), uz(-shape.height / 2, shape.height / 2);
  std::vector<Vec3> pts;
  pts.reserve(kPointCloudSize);
  while (static_cast<int>(pts.size()) < kPointCloudSize) {
    const Vec3 p(ux(rng), uy(rng), uz(rng));
    if (!inside_convex(shape.footprint, p.head<2>())) continue;
    if (shape.top == TopProfile::kRidge) {
      // Roof cross-section: height falls linearly from the ridge (y = 0) to the eaves.
      const double half = max_y;
      const double roof = shape.height * (1.0 - std::abs(p.y()) / half);
      if (p.z() + shape.height / 2 > roof) continue;
    }
    pts.push_back(p);
  }
  return pts;
}

BrickShape make_shape(int id, std::string name, std::vector<Vec2> footprint, double height, Symmetry sym,
                      TopProfile top, std::uint64_t library_seed) {
  BrickShape s;
  s.id = id;
  s.name = std::move(name);
  s.footprint = std::move(footprint);
  s.height = height;
  s.symmetry = sym;
  s.top = top;
  s.point_cloud = sample_volume(s, derive_seed(library_seed, static_cast<std::uint64_t>(id)));
  return s;
}

BrickShape make_lego_brick(int id, int cells_x, int cells_y) {
  const Symmetry sym = cells_x == cells_y ? Symmetry::kFour : Symmetry::kTwo;
  BrickShape s = make_shape(id, std::to_string(cells_x) + "x" + std::to_string(cells_y),
                            rectangle(cells_x, cells_y), kLegoLayerHeight, sym, TopProfile::kFlat, 0x1e90ULL);
  std::vector<GridOffset> cells;
  for (int x = 0; x < cells_x; ++x)
    for (int y = 0; y < cells_y; ++y) cells.push_back({x, y});
  s.stud_top = cells;
  s.socket_bottom = cells;
  return s;
}

}  // namespace

Library clevr_library() {
  constexpr std::uint64_t seed = 0xc1e7ULL;
  Library lib;
  lib.name = "clevr";
  const double side = std::sqrt(2.0);
  lib.shapes = {
      make_shape(0, "cube_1x1x1", rectangle(1, 1), 1.0, Symmetry::kFour, TopProfile::kFlat, seed),
      make_shape(1, "prism_1x1x2", rectangle(1, 1), 2.0, Symmetry::kFour, TopProfile::kFlat, seed),
      make_shape(2, "prism_1x2x0.5", rectangle(1, 2), 0.5, Symmetry::kTwo, TopProfile::kFlat, seed),
      make_shape(3, "prism_2x2x0.5", rectangle(2, 2), 0.5, Symmetry::kFour, TopProfile::kFlat, seed),
      make_shape(4, "cylinder_d1_h1", disc(0.5, 32), 1.0, Symmetry::kContinuous, TopProfile::kFlat, seed),
      make_shape(5, "triangular_prism", rectangle(side, side), side / 2.0, Symmetry::kTwo, TopProfile::kRidge, seed),
  };
  const std::array<std::pair<const char*, std::array<double, 3>>, 8> colors{{
      {"gray", {0.50, 0.50, 0.50}},
      {"red", {0.68, 0.14, 0.14}},
      {"blue", {0.16, 0.29, 0.84}},
      {"green", {0.11, 0.41, 0.08}},
      {"brown", {0.51, 0.29, 0.10}},
      {"purple", {0.51, 0.15, 0.75}},
      {"cyan", {0.16, 0.82, 0.82}},
      {"yellow", {1.00, 0.93, 0.20}},
  }};
  int id = 0;
  for (const char* material : {"rubber", "metal"}) {
    const double scale = std::string(material) == "metal" ? 0.8 : 1.0;
    for (const auto& [name, rgb] : colors)
      lib.textures.push_back({id++, std::string(material) + "_" + name, {rgb[0] * scale, rgb[1] * scale, rgb[2] * scale}});
  }
  return lib;
}

Library lego_library() {
  Library lib;
  lib.name = "lego";
  const std::array<std::pair<int, int>, 12> sizes{
      {{1, 1}, {1, 2}, {1, 3}, {1, 4}, {1, 6}, {2, 2}, {2, 3}, {2, 4}, {2, 6}, {3, 3}, {4, 4}, {4, 6}}};
  int id = 0;
  for (const auto& [x, y] : sizes) lib.shapes.push_back(make_lego_brick(id++, x, y));
  const std::array<std::pair<const char*, std::array<double, 3>>, 8> colors{{
      {"red", {0.79, 0.10, 0.04}},
      {"blue", {0.00, 0.33, 0.75}},
      {"yellow", {0.98, 0.79, 0.18}},
      {"green", {0.14, 0.48, 0.25}},
      {"white", {0.95, 0.95, 0.95}},
      {"black", {0.11, 0.13, 0.14}},
      {"orange", {1.00, 0.50, 0.12}},
      {"gray", {0.63, 0.65, 0.64}},
  }};
  id = 0;
  for (const auto& [name, rgb] : colors) lib.textures.push_back({id++, name, rgb});
  return lib;
}

const Library& builtin_library(const std::string& name) {
  static const Library clevr = clevr_library();
  static const Library lego = lego_library();
  if (name == "clevr") return clevr;
  if (name == "lego") return lego;
  throw Error(Errc::kInvalidArgument, "unknown built-in library '" + name + "'");
}

double lego_layer_height() { return kLegoLayerHeight; }

}  // namespace brickasm
