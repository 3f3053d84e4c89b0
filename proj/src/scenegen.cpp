#include "brickasm/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "brickasm/error.hpp"

namespace brickasm {

std::string to_string(Style style) { return style == Style::kClevr ? "clevr" : "lego"; }

Style style_from_string(const std::string& name) {
  if (name == "clevr") return Style::kClevr;
  if (name == "lego") return Style::kLego;
  throw Error(Errc::kInvalidArgument, "unknown style '" + name + "' (expected clevr or lego)");
}

void GenConfig::validate() const {
  if (min_bricks < 1 || max_bricks < min_bricks)
    throw Error(Errc::kInvalidArgument, "brick_count_range must be a non-empty interval of positive counts");
  if (!(area_max > area_min)) throw Error(Errc::kInvalidArgument, "area must have positive extent");
  if (max_retries < 1) throw Error(Errc::kInvalidArgument, "max_retries must be >= 1");
  if (!(stack_prob >= 0.0 && stack_prob <= 1.0)) throw Error(Errc::kInvalidArgument, "stack_prob outside [0,1]");
}

// ---- polygon helpers -------------------------------------------------------

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

bool inside_hull(const std::vector<Vec2>& hull, const Vec2& p, double tol) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return (hull[0] - p).norm() <= tol;
  if (hull.size() == 2) {
    const Vec2 d = hull[1] - hull[0];
    const double t = std::clamp((p - hull[0]).dot(d) / d.squaredNorm(), 0.0, 1.0);
    return (hull[0] + t * d - p).norm() <= tol;
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    if (cross(a, b, p) < -tol * (b - a).norm()) return false;
  }
  return true;
}

}  // namespace

std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clip) {
  std::vector<Vec2> out = subject;
  for (std::size_t e = 0; e < clip.size() && !out.empty(); ++e) {
    const Vec2& a = clip[e];
    const Vec2& b = clip[(e + 1) % clip.size()];
    const std::vector<Vec2> in = std::move(out);
    out.clear();
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Vec2& p = in[i];
      const Vec2& q = in[(i + 1) % in.size()];
      const double cp = cross(a, b, p);
      const double cq = cross(a, b, q);
      if (cp >= 0.0) out.push_back(p);
      if ((cp >= 0.0) != (cq >= 0.0)) out.push_back(p + (q - p) * (cp / (cp - cq)));
    }
  }
  return out;
}

double polygon_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return a / 2.0;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

// ---- CLEVR -----------------------------------------------------------------

namespace {

constexpr double kOverlapArea = 1e-9;

double top_of(const BrickInstance& b, const Library& lib) {
  return b.pose.position.z() + lib.shape(b.shape_id).height / 2.0;
}

}  // namespace

Settling settle(std::span<const BrickInstance> placed, const Library& library, const BrickShape& shape, double x,
                double y, double yaw) {
  const auto fp = world_footprint(shape, Pose3{Vec3(x, y, 0.0), yaw});
  std::vector<std::pair<int, double>> overlapping;
  Settling s;
  for (std::size_t i = 0; i < placed.size(); ++i) {
    const auto& other = placed[i];
    const auto other_fp = world_footprint(library.shape(other.shape_id), other.pose);
    if (polygon_area(clip_convex(fp, other_fp)) <= kOverlapArea) continue;
    const double top = top_of(other, library);
    overlapping.emplace_back(static_cast<int>(i), top);
    s.bottom = std::max(s.bottom, top);
  }
  for (const auto& [idx, top] : overlapping)
    if (std::abs(top - s.bottom) <= kContactTolerance) s.supporters.push_back(idx);
  return s;
}

bool stability_check(std::span<const BrickInstance> placed, const Library& library, const BrickInstance& candidate) {
  const BrickShape& shape = library.shape(candidate.shape_id);
  const double bottom = candidate.pose.position.z() - shape.height / 2.0;
  if (std::abs(bottom) <= kContactTolerance) return true;  // full ground contact

  const auto fp = world_footprint(shape, candidate.pose);
  std::vector<Vec2> contact;
  for (const auto& other : placed) {
    const BrickShape& os = library.shape(other.shape_id);
    if (std::abs(top_of(other, library) - bottom) > kContactTolerance) continue;
    const auto region = clip_convex(fp, world_footprint(os, other.pose));
    if (polygon_area(region) <= kOverlapArea) continue;
    // A ridge gives line contact only; nothing rests on it.
    if (os.top == TopProfile::kRidge) return false;
    contact.insert(contact.end(), region.begin(), region.end());
  }
  if (contact.empty()) return false;
  return inside_hull(convex_hull(contact), candidate.pose.position.head<2>(), 1e-9);
}

Scene generate_clevr_scene(const Library& library, const GenConfig& config, Rng& rng) {
  config.validate();
  std::uniform_int_distribution<int> count_dist(config.min_bricks, config.max_bricks);
  std::uniform_int_distribution<std::size_t> shape_dist(0, library.shapes.size() - 1);
  std::uniform_int_distribution<std::size_t> texture_dist(0, library.textures.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> area(config.area_min, config.area_max);
  std::uniform_real_distribution<double> yaw_dist(0.0, kTwoPi);
  std::normal_distribution<double> offset(0.0, config.stack_sigma);

  Scene scene;
  scene.style = "clevr";
  scene.library_ref = library.name;
  const int n = count_dist(rng);
  for (int step = 0; step < n; ++step) {
    bool placed = false;
    for (int attempt = 0; attempt < config.max_retries && !placed; ++attempt) {
      const BrickShape& shape = library.shapes[shape_dist(rng)];
      const BrickTexture& texture = library.textures[texture_dist(rng)];
      const double yaw = wrap_angle(yaw_dist(rng));
      double x = 0.0, y = 0.0;
      std::vector<int> flat_tops;
      for (std::size_t i = 0; i < scene.bricks.size(); ++i)
        if (library.shape(scene.bricks[i].shape_id).top == TopProfile::kFlat) flat_tops.push_back(static_cast<int>(i));
      if (!flat_tops.empty() && unit(rng) < config.stack_prob) {
        std::uniform_int_distribution<std::size_t> pick(0, flat_tops.size() - 1);
        const auto& target = scene.bricks[flat_tops[pick(rng)]];
        x = target.pose.position.x() + offset(rng);
        y = target.pose.position.y() + offset(rng);
      } else {
        x = area(rng);
        y = area(rng);
      }
      const auto fp = world_footprint(shape, Pose3{Vec3(x, y, 0.0), yaw});
      const bool in_area = std::all_of(fp.begin(), fp.end(), [&](const Vec2& p) {
        return p.x() >= config.area_min && p.x() <= config.area_max && p.y() >= config.area_min &&
               p.y() <= config.area_max;
      });
      if (!in_area) continue;
      const Settling s = settle(scene.bricks, library, shape, x, y, yaw);
      BrickInstance candidate{shape.id, texture.id, Pose3{Vec3(x, y, s.bottom + shape.height / 2.0), yaw}};
      if (!stability_check(scene.bricks, library, candidate)) continue;
      for (int sup : s.supporters) scene.support_edges.push_back({sup, step});
      scene.bricks.push_back(candidate);
      placed = true;
    }
    if (!placed)
      throw Error(Errc::kGenerationExhausted,
                  "no stable placement for brick " + std::to_string(step) + " after " +
                      std::to_string(config.max_retries) + " retries");
  }

  CameraSampling cams = config.cameras;
  cams.target = Vec3::Zero();
  for (const auto& b : scene.bricks) cams.target += b.pose.position;
  cams.target /= static_cast<double>(scene.bricks.size());
  scene.cameras = sample_cameras(rng, cams);
  return scene;
}

// ---- LEGO ------------------------------------------------------------------

namespace {

GridOffset rotate_offset(const GridOffset& o, int rot, const GridOffset& ext) {
  switch (((rot % 4) + 4) % 4) {
    case 1: return {ext.y - 1 - o.y, o.x};
    case 2: return {ext.x - 1 - o.x, ext.y - 1 - o.y};
    case 3: return {o.y, ext.x - 1 - o.x};
    default: return o;
  }
}

GridOffset rotated_extent(const BrickShape& shape, int rot) {
  const GridOffset ext = shape.grid_extent();
  return rot % 2 == 0 ? ext : GridOffset{ext.y, ext.x};
}

std::vector<GridCell> place_offsets(const std::vector<GridOffset>& offsets, const BrickShape& shape,
                                    const DiscretePose& pose, int layer) {
  const GridOffset ext = shape.grid_extent();
  std::vector<GridCell> out;
  out.reserve(offsets.size());
  for (const auto& o : offsets) {
    const GridOffset r = rotate_offset(o, pose.rot, ext);
    out.push_back({pose.x + r.x, pose.y + r.y, layer});
  }
  return out;
}

void require_grid(const BrickShape& shape) {
  if (!shape.is_grid_shape()) throw Error(Errc::kInvalidArgument, "shape " + shape.name + " has no stud grid");
}

}  // namespace

std::vector<GridCell> footprint_cells(const BrickShape& shape, const DiscretePose& pose) {
  require_grid(shape);
  const GridOffset ext = shape.grid_extent();
  std::vector<GridOffset> all;
  for (int x = 0; x < ext.x; ++x)
    for (int y = 0; y < ext.y; ++y) all.push_back({x, y});
  return place_offsets(all, shape, pose, pose.layer);
}

std::vector<GridCell> socket_cells(const BrickShape& shape, const DiscretePose& pose) {
  require_grid(shape);
  return place_offsets(*shape.socket_bottom, shape, pose, pose.layer);
}

std::vector<GridCell> stud_cells(const BrickShape& shape, const DiscretePose& pose) {
  require_grid(shape);
  if (!shape.stud_top) return {};
  return place_offsets(*shape.stud_top, shape, pose, pose.layer);
}

std::vector<int> canonical_rotations(const BrickShape& shape) {
  switch (shape.symmetry) {
    case Symmetry::kFour:
    case Symmetry::kContinuous: return {0};
    case Symmetry::kTwo: return {0, 1};
    case Symmetry::kOne: return {0, 1, 2, 3};
  }
  return {0, 1, 2, 3};
}

Pose3 to_world_pose(const BrickShape& shape, const DiscretePose& pose) {
  const GridOffset ext = rotated_extent(shape, pose.rot);
  const double h = lego_layer_height();
  return Pose3{Vec3(pose.x + ext.x / 2.0, pose.y + ext.y / 2.0, pose.layer * h + h / 2.0),
               wrap_angle(pose.rot * (kPi / 2.0))};
}

DiscretePose to_discrete_pose(const BrickShape& shape, const Pose3& pose) {
  require_grid(shape);
  int rot = static_cast<int>(std::lround(wrap_angle(pose.yaw) / (kPi / 2.0))) % 4;
  const auto rots = canonical_rotations(shape);
  if (rots.size() == 1) rot = 0;
  else if (rots.size() == 2) rot %= 2;
  const GridOffset ext = rotated_extent(shape, rot);
  const double h = lego_layer_height();
  return DiscretePose{static_cast<int>(std::lround(pose.position.x() - ext.x / 2.0)),
                      static_cast<int>(std::lround(pose.position.y() - ext.y / 2.0)),
                      static_cast<int>(std::lround((pose.position.z() - h / 2.0) / h)), rot};
}

bool AssemblyState::collides(const BrickShape& shape, const DiscretePose& pose) const {
  for (const auto& c : footprint_cells(shape, pose))
    if (occupied.count(c)) return true;
  return false;
}

std::vector<int> AssemblyState::place(const BrickShape& shape, const DiscretePose& pose) {
  const int index = static_cast<int>(placements.size());
  std::set<int> supporters;
  for (const auto& s : socket_cells(shape, pose)) {
    const GridCell below{s.x, s.y, s.layer - 1};
    if (auto it = occupied.find(below); it != occupied.end()) supporters.insert(it->second);
    studs.erase(below);
  }
  for (const auto& c : footprint_cells(shape, pose)) occupied[c] = index;
  for (const auto& c : stud_cells(shape, pose))
    if (!occupied.count(GridCell{c.x, c.y, c.layer + 1})) studs.insert(c);
  placements.push_back(pose);
  return {supporters.begin(), supporters.end()};
}

std::vector<DiscretePose> feasible_poses(const AssemblyState& state, const BrickShape& shape) {
  require_grid(shape);
  std::map<std::pair<int, int>, int> column_top;
  for (const auto& [cell, idx] : state.occupied) {
    auto& top = column_top.try_emplace({cell.x, cell.y}, cell.layer).first->second;
    top = std::max(top, cell.layer);
  }
  std::set<DiscretePose> seen;
  std::vector<DiscretePose> out;
  const GridOffset ext = shape.grid_extent();
  for (const GridCell& stud : state.studs) {
    for (int rot : canonical_rotations(shape)) {
      for (const auto& socket : *shape.socket_bottom) {
        const GridOffset r = rotate_offset(socket, rot, ext);
        const DiscretePose pose{stud.x - r.x, stud.y - r.y, stud.layer + 1, rot};
        if (!seen.insert(pose).second) continue;
        bool ok = true;
        for (const auto& c : footprint_cells(shape, pose)) {
          if (c.x < state.area_min || c.x >= state.area_max || c.y < state.area_min || c.y >= state.area_max) {
            ok = false;
            break;
          }
          // Vertical insertion needs the whole column above the cell to be empty.
          auto it = column_top.find({c.x, c.y});
          if (it != column_top.end() && it->second >= c.layer) {
            ok = false;
            break;
          }
        }
        if (ok) out.push_back(pose);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

AssemblyState lego_state_from_scene(const Scene& scene, const Library& library, std::size_t count, int area_min,
                                    int area_max) {
  AssemblyState state;
  state.area_min = area_min;
  state.area_max = area_max;
  for (std::size_t i = 0; i < count && i < scene.bricks.size(); ++i) {
    const BrickShape& shape = library.shape(scene.bricks[i].shape_id);
    state.place(shape, to_discrete_pose(shape, scene.bricks[i].pose));
  }
  return state;
}

Scene generate_lego_scene(const Library& library, const GenConfig& config, Rng& rng) {
  config.validate();
  std::uniform_int_distribution<int> count_dist(config.min_bricks, config.max_bricks);
  std::uniform_int_distribution<std::size_t> shape_dist(0, library.shapes.size() - 1);
  std::uniform_int_distribution<std::size_t> texture_dist(0, library.textures.size() - 1);

  AssemblyState state;
  state.area_min = static_cast<int>(std::ceil(config.area_min));
  state.area_max = static_cast<int>(std::floor(config.area_max));

  Scene scene;
  scene.style = "lego";
  scene.library_ref = library.name;
  const int n = count_dist(rng);

  bool base_placed = false;
  for (int attempt = 0; attempt < config.max_retries && !base_placed; ++attempt) {
    const BrickShape& shape = library.shapes[shape_dist(rng)];
    const BrickTexture& texture = library.textures[texture_dist(rng)];
    const auto rots = canonical_rotations(shape);
    const int rot = rots[std::uniform_int_distribution<std::size_t>(0, rots.size() - 1)(rng)];
    const GridOffset ext = rotated_extent(shape, rot);
    if (state.area_max - ext.x < state.area_min || state.area_max - ext.y < state.area_min) continue;
    const DiscretePose pose{std::uniform_int_distribution<int>(state.area_min, state.area_max - ext.x)(rng),
                            std::uniform_int_distribution<int>(state.area_min, state.area_max - ext.y)(rng), 0, rot};
    state.place(shape, pose);
    scene.bricks.push_back({shape.id, texture.id, to_world_pose(shape, pose)});
    base_placed = true;
  }
  if (!base_placed) throw Error(Errc::kGenerationExhausted, "no base brick fits the area");

  for (int step = 1; step < n; ++step) {
    bool placed = false;
    for (int attempt = 0; attempt < config.max_retries && !placed; ++attempt) {
      const BrickShape& shape = library.shapes[shape_dist(rng)];
      const BrickTexture& texture = library.textures[texture_dist(rng)];
      const auto poses = feasible_poses(state, shape);
      if (poses.empty()) continue;
      const DiscretePose pose = poses[std::uniform_int_distribution<std::size_t>(0, poses.size() - 1)(rng)];
      for (int sup : state.place(shape, pose)) scene.support_edges.push_back({sup, step});
      scene.bricks.push_back({shape.id, texture.id, to_world_pose(shape, pose)});
      placed = true;
    }
    if (!placed)
      throw Error(Errc::kGenerationExhausted, "no feasible pose for brick " + std::to_string(step) + " after " +
                                                  std::to_string(config.max_retries) + " retries");
  }

  CameraSampling cams = config.cameras;
  cams.target = Vec3::Zero();
  for (const auto& b : scene.bricks) cams.target += b.pose.position;
  cams.target /= static_cast<double>(scene.bricks.size());
  scene.cameras = sample_cameras(rng, cams);
  return scene;
}

// ---- shared ----------------------------------------------------------------

Scene generate_scene(const Library& library, const GenConfig& config, std::uint64_t index) {
  const std::uint64_t scene_seed = derive_seed(config.seed, index);
  Scene scene;
  for (int attempt = 0;; ++attempt) {
    Rng rng(attempt == 0 ? scene_seed : derive_seed(scene_seed, static_cast<std::uint64_t>(attempt)));
    try {
      scene = config.style == Style::kClevr ? generate_clevr_scene(library, config, rng)
                                            : generate_lego_scene(library, config, rng);
      break;
    } catch (const Error& e) {
      if (e.code() != Errc::kGenerationExhausted || attempt + 1 >= config.max_scene_attempts) throw;
    }
  }
  char name[32];
  std::snprintf(name, sizeof(name), "scene_%06llu", static_cast<unsigned long long>(index));
  scene.name = name;
  return scene;
}

Scene annotate(Scene scene, const Library& library, int height, int width) {
  const std::size_t n = scene.bricks.size();
  scene.annotations.assign(n, std::vector<ViewAnnotation>(scene.cameras.size()));
  for (std::size_t v = 0; v < scene.cameras.size(); ++v) {
    const Camera& cam = scene.cameras[v];
    const auto raster = rasterize_scene(scene, library, cam, height, width);
    for (std::size_t b = 0; b < n; ++b) {
      ViewAnnotation& a = scene.annotations[b][v];
      try {
        const Projection p = project(cam, scene.bricks[b].pose.position);
        if (p.u >= 0.0 && p.u <= 1.0 && p.v >= 0.0 && p.v <= 1.0) a.keypoint = Vec2(p.u, p.v);
      } catch (const Error& e) {
        if (e.code() != Errc::kBehindCamera) throw;
      }
      a.view_rotation = view_rotation(cam, scene.bricks[b].pose.yaw);
      a.mask = raster[b].visible;
      a.visible_ratio = raster[b].visible_ratio;
      a.gt_confidence = a.visible_ratio;
    }
  }
  return scene;
}

DatasetStats dataset_stats(std::span<const Scene> scenes) {
  if (scenes.empty()) throw Error(Errc::kEmptyDataset, "dataset_stats needs at least one scene");
  DatasetStats st;
  st.scenes = scenes.size();
  double bricks = 0.0, depth = 0.0, vis = 0.0;
  std::size_t views = 0;
  for (const Scene& s : scenes) {
    bricks += static_cast<double>(s.bricks.size());
    depth += longest_path_vertices(static_cast<int>(s.bricks.size()), s.support_edges);
    for (const auto& row : s.annotations)
      for (const auto& a : row) {
        vis += a.visible_ratio;
        ++views;
      }
  }
  st.mean_bricks = bricks / static_cast<double>(scenes.size());
  st.mean_depth = depth / static_cast<double>(scenes.size());
  st.mean_visibility = views == 0 ? 0.0 : vis / static_cast<double>(views);
  return st;
}

}  // namespace brickasm
