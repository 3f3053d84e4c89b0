#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "brickasm/geometry.hpp"
#include "brickasm/model.hpp"
#include "brickasm/rng.hpp"

namespace brickasm {

enum class Style { kClevr, kLego };

std::string to_string(Style style);
Style style_from_string(const std::string& name);

struct GenConfig {
  Style style = Style::kClevr;
  int min_bricks = 4;
  int max_bricks = 11;
  double area_min = -3.0;
  double area_max = 3.0;
  int max_retries = 50;
  std::uint64_t seed = 0;
  // CLEVR position sampling: with probability stack_prob a new brick is aimed
  // at a random flat-topped brick already placed, offset by N(0, stack_sigma^2)
  // per axis; otherwise (x, y) is uniform over the area.
  double stack_prob = 0.5;
  double stack_sigma = 0.3;
  CameraSampling cameras = default_cameras();
  // generate_scene re-seeds a whole scene this many times on GenerationExhausted.
  int max_scene_attempts = 20;

  static CameraSampling default_cameras() {
    CameraSampling c;
    c.focal = 0.8;
    return c;
  }
  void validate() const;
};

// ---- CLEVR ---------------------------------------------------------------

/// Lowered brick: resting height and the placed bricks it touches.
struct Settling {
  double bottom = 0.0;
  std::vector<int> supporters;
};

inline constexpr double kContactTolerance = 1e-6;

/// Drops a brick with the given footprint pose vertically onto `placed`.
Settling settle(std::span<const BrickInstance> placed, const Library& library, const BrickShape& shape, double x,
                double y, double yaw);

/// True iff the candidate's centre of mass projects inside the convex hull of
/// its contact region. The candidate must already rest at its contact height.
bool stability_check(std::span<const BrickInstance> placed, const Library& library, const BrickInstance& candidate);

/// Convex polygon intersection (both CCW). Empty if they do not overlap.
std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clip);
double polygon_area(const std::vector<Vec2>& poly);
/// Monotone-chain convex hull, CCW, collinear points dropped.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

Scene generate_clevr_scene(const Library& library, const GenConfig& config, Rng& rng);

// ---- LEGO ----------------------------------------------------------------

struct GridCell {
  int x = 0;
  int y = 0;
  int layer = 0;
  auto operator<=>(const GridCell&) const = default;
};

// Placement on the stud grid: min-corner cell, layer, quarter turns.
struct DiscretePose {
  int x = 0;
  int y = 0;
  int layer = 0;
  int rot = 0;
  auto operator<=>(const DiscretePose&) const = default;
};

struct AssemblyState {
  std::map<GridCell, int> occupied;  // cell -> brick index
  std::set<GridCell> studs;          // exposed studs, keyed by the cell they sit on
  std::vector<DiscretePose> placements;
  int area_min = -3;
  int area_max = 3;

  /// Places a brick and returns the indices of the bricks it rests on.
  std::vector<int> place(const BrickShape& shape, const DiscretePose& pose);
  bool collides(const BrickShape& shape, const DiscretePose& pose) const;
};

/// Cells covered by the shape's footprint at `pose`.
std::vector<GridCell> footprint_cells(const BrickShape& shape, const DiscretePose& pose);
/// World cells of the shape's sockets (bottom) at `pose`.
std::vector<GridCell> socket_cells(const BrickShape& shape, const DiscretePose& pose);
/// World cells whose tops carry the shape's studs at `pose`.
std::vector<GridCell> stud_cells(const BrickShape& shape, const DiscretePose& pose);

/// Quarter-turn counts that are distinct under the shape's symmetry.
std::vector<int> canonical_rotations(const BrickShape& shape);

Pose3 to_world_pose(const BrickShape& shape, const DiscretePose& pose);
DiscretePose to_discrete_pose(const BrickShape& shape, const Pose3& pose);

/// Every placement where at least one socket mates an exposed stud without
/// collision, with a clear column above, inside the area. Sorted, symmetry-deduplicated.
std::vector<DiscretePose> feasible_poses(const AssemblyState& state, const BrickShape& shape);

/// Rebuilds the grid state from the first `count` bricks of a LEGO scene.
AssemblyState lego_state_from_scene(const Scene& scene, const Library& library, std::size_t count,
                                    int area_min = -3, int area_max = 3);

Scene generate_lego_scene(const Library& library, const GenConfig& config, Rng& rng);

// ---- shared ----------------------------------------------------------------

/// Style dispatch + scene naming; uses the per-scene seed derive_seed(config.seed, index).
/// An exhausted attempt is retried with derive_seed(that seed, attempt).
Scene generate_scene(const Library& library, const GenConfig& config, std::uint64_t index);

/// Fills keypoints, masks, visibility, view rotations and confidences.
Scene annotate(Scene scene, const Library& library, int height = 224, int width = 224);

struct DatasetStats {
  std::size_t scenes = 0;
  double mean_bricks = 0.0;
  double mean_visibility = 0.0;
  double mean_depth = 0.0;
};

DatasetStats dataset_stats(std::span<const Scene> scenes);

}  // namespace brickasm
