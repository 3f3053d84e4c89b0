#pragma once

#include <Eigen/Core>
#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace brickasm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr int kPointCloudSize = 1024;

/// Wraps an angle into [0, 2*pi).
double wrap_angle(double radians);

/// Smallest absolute difference between two angles, modulo `period`.
double angle_distance(double a, double b, double period = kTwoPi);

// Yaw symmetry of a shape. kContinuous shapes look identical under any yaw.
enum class Symmetry { kContinuous = 0, kOne = 1, kTwo = 2, kFour = 4 };

/// Rotation period implied by a symmetry order; 0 for continuous symmetry.
double symmetry_period(Symmetry s);

// Shape of the top surface, which decides what can rest on a brick.
enum class TopProfile { kFlat, kRidge };

struct GridOffset {
  int x = 0;
  int y = 0;
  auto operator<=>(const GridOffset&) const = default;
};

struct BrickShape {
  int id = 0;
  std::string name;
  // Counter-clockwise, convex, centred on the brick's local origin.
  std::vector<Vec2> footprint;
  double height = 1.0;
  std::vector<Vec3> point_cloud;
  Symmetry symmetry = Symmetry::kOne;
  TopProfile top = TopProfile::kFlat;
  // Stud-grid shapes only: cell offsets from the footprint's min corner.
  std::optional<std::vector<GridOffset>> stud_top;
  std::optional<std::vector<GridOffset>> socket_bottom;

  bool is_grid_shape() const { return socket_bottom.has_value(); }
  // Grid extent (cells along local x and y); only meaningful for grid shapes.
  GridOffset grid_extent() const;
};

struct BrickTexture {
  int id = 0;
  std::string name;
  std::array<double, 3> rgb{0.0, 0.0, 0.0};
};

struct Library {
  std::string name;
  std::vector<BrickShape> shapes;
  std::vector<BrickTexture> textures;

  const BrickShape& shape(int id) const;
  const BrickTexture& texture(int id) const;
  bool has_shape(int id) const;
  bool has_texture(int id) const;
  std::size_t category_count() const { return shapes.size() * textures.size(); }
};

struct Pose3 {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
};

struct BrickInstance {
  int shape_id = 0;
  int texture_id = 0;
  Pose3 pose;
};

struct Camera {
  Mat3 rotation = Mat3::Identity();  // world -> camera
  Vec3 translation = Vec3::Zero();
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  int width = 224;
  int height = 224;

  /// Optical centre in world coordinates.
  Vec3 center() const { return -rotation.transpose() * translation; }
  /// Azimuth of the optical centre about +z, in [0, 2*pi).
  double azimuth() const;
};

// Row-major run-length encoded binary raster. Runs alternate starting with 0s.
class Mask {
 public:
  Mask() = default;
  Mask(int height, int width, std::vector<std::uint32_t> runs);

  static Mask encode(const std::vector<std::uint8_t>& cells, int height, int width);
  static Mask empty(int height, int width);

  std::vector<std::uint8_t> decode() const;
  std::size_t count() const;
  bool decodes_exactly() const;

  int height() const { return height_; }
  int width() const { return width_; }
  const std::vector<std::uint32_t>& runs() const { return runs_; }

  bool operator==(const Mask&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint32_t> runs_;
};

/// Intersection over union; two empty masks have IoU 1.
double mask_iou(const Mask& a, const Mask& b);

struct ViewAnnotation {
  std::optional<Vec2> keypoint;  // absent when behind the camera or off-frame
  double view_rotation = 0.0;
  Mask mask;
  double visible_ratio = 0.0;
  double gt_confidence = 0.0;
};

struct Edge {
  int from = 0;
  int to = 0;
  auto operator<=>(const Edge&) const = default;
};

struct Scene {
  std::string name;
  std::string style;        // "clevr" or "lego"
  std::string library_ref;  // built-in library name or path
  std::vector<BrickInstance> bricks;
  std::vector<Edge> support_edges;
  std::vector<Camera> cameras;
  // annotations[brick][view]; empty until annotated.
  std::vector<std::vector<ViewAnnotation>> annotations;

  bool annotated() const { return !annotations.empty(); }
};

struct RelationGraph {
  int n = 0;
  Eigen::MatrixXd probs;
  std::vector<Edge> accepted;
};

struct ViewPrediction {
  std::optional<Vec2> keypoint;
  double rot_sin = 0.0;
  double rot_cos = 1.0;
  Mask mask;
  double confidence = 0.0;

  /// View rotation angle from the normalized (sin, cos) pair.
  double rotation() const;
};

struct BrickPrediction {
  int shape_id = 0;
  int texture_id = 0;
  std::vector<ViewPrediction> views;
  std::optional<Pose3> pose;
  bool low_quality = false;
};

struct PredictionSet {
  std::string scene;
  int predicted_count = 0;
  std::vector<BrickPrediction> bricks;
};

enum class ViolationKind {
  kUnknownShape,
  kUnknownTexture,
  kYawRange,
  kEdgeIndex,
  kSelfLoop,
  kOrdering,
  kCycle,
  kUnsupported,
  kCamera,
  kAnnotation,
};

struct Violation {
  ViolationKind kind;
  std::string subject;  // e.g. "brick 3", "edge (1,0)"
  std::string message;
};

/// Checks every scene invariant; an empty result means the scene is valid.
std::vector<Violation> validate_scene(const Scene& scene, const Library& library);

/// Finds one directed cycle, returned as its vertex sequence; empty if acyclic.
std::vector<int> find_cycle(int n, const std::vector<Edge>& edges);

/// Vertex count of the longest directed path (1 for edgeless non-empty graphs).
int longest_path_vertices(int n, const std::vector<Edge>& edges);

// Built-in catalogues.
Library clevr_library();
Library lego_library();
/// "clevr" or "lego"; throws Error(kInvalidArgument) for anything else.
const Library& builtin_library(const std::string& name);
/// Vertical pitch of the LEGO stud grid.
double lego_layer_height();

/// Library invariants: point-cloud size, simple positive-area footprints, positive height, unique ids.
std::vector<std::string> validate_library(const Library& library);

/// Convex brick footprint rotated by `yaw` and translated to (x, y).
std::vector<Vec2> world_footprint(const BrickShape& shape, const Pose3& pose);

}  // namespace brickasm
