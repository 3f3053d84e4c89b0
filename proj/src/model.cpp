#include "brickasm/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "brickasm/error.hpp"

namespace brickasm {

double wrap_angle(double radians) {
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2*pi.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double angle_distance(double a, double b, double period) {
  if (period <= 0.0) return 0.0;
  double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

double symmetry_period(Symmetry s) {
  switch (s) {
    case Symmetry::kContinuous: return 0.0;
    case Symmetry::kOne: return kTwoPi;
    case Symmetry::kTwo: return kPi;
    case Symmetry::kFour: return kPi / 2.0;
  }
  return kTwoPi;
}

GridOffset BrickShape::grid_extent() const {
  GridOffset ext{0, 0};
  if (!socket_bottom) return ext;
  for (const auto& c : *socket_bottom) {
    ext.x = std::max(ext.x, c.x + 1);
    ext.y = std::max(ext.y, c.y + 1);
  }
  return ext;
}

const BrickShape& Library::shape(int id) const {
  for (const auto& s : shapes)
    if (s.id == id) return s;
  throw Error(Errc::kInvalidArgument, "unknown shape id " + std::to_string(id) + " in library " + name);
}

const BrickTexture& Library::texture(int id) const {
  for (const auto& t : textures)
    if (t.id == id) return t;
  throw Error(Errc::kInvalidArgument, "unknown texture id " + std::to_string(id) + " in library " + name);
}

bool Library::has_shape(int id) const {
  return std::any_of(shapes.begin(), shapes.end(), [id](const auto& s) { return s.id == id; });
}

bool Library::has_texture(int id) const {
  return std::any_of(textures.begin(), textures.end(), [id](const auto& t) { return t.id == id; });
}

double Camera::azimuth() const {
  const Vec3 c = center();
  return wrap_angle(std::atan2(c.y(), c.x()));
}

Mask::Mask(int height, int width, std::vector<std::uint32_t> runs)
    : height_(height), width_(width), runs_(std::move(runs)) {}

Mask Mask::encode(const std::vector<std::uint8_t>& cells, int height, int width) {
  if (cells.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width))
    throw Error(Errc::kInvalidArgument, "mask cell count does not match raster size");
  std::vector<std::uint32_t> runs;
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (std::uint8_t c : cells) {
    const std::uint8_t bit = c ? 1 : 0;
    if (bit != current) {
      runs.push_back(run);
      run = 0;
      current = bit;
    }
    ++run;
  }
  runs.push_back(run);
  return Mask(height, width, std::move(runs));
}

Mask Mask::empty(int height, int width) {
  return Mask(height, width, {static_cast<std::uint32_t>(height * width)});
}

std::vector<std::uint8_t> Mask::decode() const {
  std::vector<std::uint8_t> cells;
  cells.reserve(static_cast<std::size_t>(height_) * width_);
  std::uint8_t bit = 0;
  for (std::uint32_t r : runs_) {
    cells.insert(cells.end(), r, bit);
    bit ^= 1;
  }
  if (!decodes_exactly())
    throw Error(Errc::kSchema, "mask runs do not sum to height*width");
  return cells;
}

std::size_t Mask::count() const {
  std::size_t total = 0;
  for (std::size_t i = 1; i < runs_.size(); i += 2) total += runs_[i];
  return total;
}

bool Mask::decodes_exactly() const {
  const std::uint64_t sum = std::accumulate(runs_.begin(), runs_.end(), std::uint64_t{0});
  return height_ >= 0 && width_ >= 0 && sum == static_cast<std::uint64_t>(height_) * width_;
}

double mask_iou(const Mask& a, const Mask& b) {
  if (a.height() != b.height() || a.width() != b.width())
    throw Error(Errc::kInvalidArgument, "mask_iou: raster sizes differ");
  const auto da = a.decode();
  const auto db = b.decode();
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    inter += (da[i] & db[i]);
    uni += (da[i] | db[i]);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double ViewPrediction::rotation() const {
  const double norm = std::hypot(rot_sin, rot_cos);
  if (norm == 0.0) return 0.0;
  return wrap_angle(std::atan2(rot_sin / norm, rot_cos / norm));
}

std::vector<Vec2> world_footprint(const BrickShape& shape, const Pose3& pose) {
  const double c = std::cos(pose.yaw), s = std::sin(pose.yaw);
  std::vector<Vec2> out;
  out.reserve(shape.footprint.size());
  for (const Vec2& p : shape.footprint)
    out.emplace_back(pose.position.x() + c * p.x() - s * p.y(), pose.position.y() + s * p.x() + c * p.y());
  return out;
}

namespace {

std::vector<std::vector<int>> adjacency(int n, const std::vector<Edge>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (const Edge& e : edges)
    if (e.from >= 0 && e.from < n && e.to >= 0 && e.to < n) adj[e.from].push_back(e.to);
  return adj;
}

bool reaches(const std::vector<std::vector<int>>& adj, int src, int dst) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<int> stack{src};
  seen[src] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (v == dst) return true;
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
  }
  return false;
}

std::string edge_name(const Edge& e) {
  return "edge (" + std::to_string(e.from) + "," + std::to_string(e.to) + ")";
}

}  // namespace

std::vector<int> find_cycle(int n, const std::vector<Edge>& edges) {
  const auto adj = adjacency(n, edges);
  std::vector<int> color(n, 0), parent(n, -1);
  for (int root = 0; root < n; ++root) {
    if (color[root]) continue;
    // Iterative DFS keeping (vertex, next child index).
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    color[root] = 1;
    while (!stack.empty()) {
      auto& [v, idx] = stack.back();
      if (idx < adj[v].size()) {
        const int w = adj[v][idx++];
        if (color[w] == 1) {
          std::vector<int> cycle{w};
          for (int u = v; u != w; u = parent[u]) cycle.push_back(u);
          std::reverse(cycle.begin() + 1, cycle.end());
          return cycle;
        }
        if (color[w] == 0) {
          color[w] = 1;
          parent[w] = v;
          stack.emplace_back(w, 0);
        }
      } else {
        color[v] = 2;
        stack.pop_back();
      }
    }
  }
  return {};
}

int longest_path_vertices(int n, const std::vector<Edge>& edges) {
  if (n == 0) return 0;
  const auto adj = adjacency(n, edges);
  std::vector<int> indeg(n, 0);
  for (int v = 0; v < n; ++v)
    for (int w : adj[v]) ++indeg[w];
  std::vector<int> depth(n, 1), queue;
  for (int v = 0; v < n; ++v)
    if (indeg[v] == 0) queue.push_back(v);
  std::size_t head = 0;
  while (head < queue.size()) {
    const int v = queue[head++];
    for (int w : adj[v]) {
      depth[w] = std::max(depth[w], depth[v] + 1);
      if (--indeg[w] == 0) queue.push_back(w);
    }
  }
  if (queue.size() != static_cast<std::size_t>(n)) throw Error(Errc::kCyclicGraph, "longest path on a cyclic graph");
  return *std::max_element(depth.begin(), depth.end());
}

std::vector<Violation> validate_scene(const Scene& scene, const Library& library) {
  std::vector<Violation> out;
  const int n = static_cast<int>(scene.bricks.size());
  auto add = [&out](ViolationKind k, std::string subject, std::string message) {
    out.push_back({k, std::move(subject), std::move(message)});
  };

  for (int i = 0; i < n; ++i) {
    const auto& b = scene.bricks[i];
    const std::string who = "brick " + std::to_string(i);
    if (!library.has_shape(b.shape_id)) add(ViolationKind::kUnknownShape, who, "shape id does not resolve");
    if (!library.has_texture(b.texture_id)) add(ViolationKind::kUnknownTexture, who, "texture id does not resolve");
    if (!(b.pose.yaw >= 0.0 && b.pose.yaw < kTwoPi)) add(ViolationKind::kYawRange, who, "yaw outside [0, 2pi)");
  }

  std::vector<Edge> in_range;
  for (const Edge& e : scene.support_edges) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
      add(ViolationKind::kEdgeIndex, edge_name(e), "endpoint out of range");
      continue;
    }
    if (e.from == e.to) {
      add(ViolationKind::kSelfLoop, edge_name(e), "self-loop");
      continue;
    }
    in_range.push_back(e);
  }

  const auto cycle = find_cycle(n, in_range);
  const auto adj = adjacency(n, in_range);
  if (!cycle.empty()) {
    std::ostringstream msg;
    msg << "support edges contain a cycle:";
    for (int v : cycle) msg << ' ' << v;
    add(ViolationKind::kCycle, "support graph", msg.str());
  }
  for (const Edge& e : in_range) {
    // Edges on a cycle are already covered by the acyclicity violation.
    if (!cycle.empty() && reaches(adj, e.to, e.from)) continue;
    if (e.from > e.to) add(ViolationKind::kOrdering, edge_name(e), "supporter is placed after the supported brick");
  }

  std::vector<char> has_support(n, 0);
  for (const Edge& e : in_range) has_support[e.to] = 1;
  for (int i = 0; i < n; ++i) {
    const auto& b = scene.bricks[i];
    if (!library.has_shape(b.shape_id)) continue;
    const double bottom = b.pose.position.z() - library.shape(b.shape_id).height / 2.0;
    if (std::abs(bottom) > 1e-6 && !has_support[i])
      add(ViolationKind::kUnsupported, "brick " + std::to_string(i), "neither on the ground nor supported");
  }

  for (std::size_t k = 0; k < scene.cameras.size(); ++k) {
    const Mat3& r = scene.cameras[k].rotation;
    const double orth = (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (orth > 1e-9 || std::abs(r.determinant() - 1.0) > 1e-9)
      add(ViolationKind::kCamera, "camera " + std::to_string(k), "rotation is not a proper orthonormal matrix");
  }

  if (scene.annotated()) {
    if (scene.annotations.size() != static_cast<std::size_t>(n)) {
      add(ViolationKind::kAnnotation, "annotations", "row count differs from brick count");
    } else {
      for (int i = 0; i < n; ++i) {
        if (scene.annotations[i].size() != scene.cameras.size()) {
          add(ViolationKind::kAnnotation, "brick " + std::to_string(i), "annotation count differs from camera count");
          continue;
        }
        for (std::size_t v = 0; v < scene.cameras.size(); ++v) {
          const auto& a = scene.annotations[i][v];
          const std::string who = "brick " + std::to_string(i) + " view " + std::to_string(v);
          if (!a.mask.decodes_exactly()) add(ViolationKind::kAnnotation, who, "mask RLE does not decode to H*W cells");
          if (!(a.visible_ratio >= 0.0 && a.visible_ratio <= 1.0))
            add(ViolationKind::kAnnotation, who, "visible_ratio outside [0,1]");
          if (!(a.gt_confidence >= 0.0 && a.gt_confidence <= 1.0))
            add(ViolationKind::kAnnotation, who, "gt_confidence outside [0,1]");
          if (a.keypoint && (a.keypoint->minCoeff() < 0.0 || a.keypoint->maxCoeff() > 1.0))
            add(ViolationKind::kAnnotation, who, "keypoint outside [0,1]^2");
          if (!(a.view_rotation >= 0.0 && a.view_rotation < kTwoPi))
            add(ViolationKind::kAnnotation, who, "view_rotation outside [0, 2pi)");
        }
      }
    }
  }
  return out;
}

}  // namespace brickasm

namespace brickasm {

namespace {

double signed_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return a / 2.0;
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const double v = (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
    return (v > 1e-12) - (v < -1e-12);
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

}  // namespace

std::vector<std::string> validate_library(const Library& library) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < library.shapes.size(); ++i) {
    const auto& s = library.shapes[i];
    const std::string who = "shape " + std::to_string(s.id);
    for (std::size_t j = i + 1; j < library.shapes.size(); ++j)
      if (library.shapes[j].id == s.id) out.push_back(who + ": duplicate id");
    if (s.point_cloud.size() != static_cast<std::size_t>(kPointCloudSize))
      out.push_back(who + ": point cloud must have exactly 1024 points");
    if (!(s.height > 0.0)) out.push_back(who + ": height must be positive");
    const auto& f = s.footprint;
    if (f.size() < 3 || !(signed_area(f) > 0.0)) {
      out.push_back(who + ": footprint needs >= 3 vertices and positive (CCW) area");
      continue;
    }
    const std::size_t m = f.size();
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 2; b < m; ++b) {
        if (a == 0 && b == m - 1) continue;  // adjacent through the wrap
        if (segments_cross(f[a], f[(a + 1) % m], f[b], f[(b + 1) % m]))
          out.push_back(who + ": footprint self-intersects");
      }
  }
  for (std::size_t i = 0; i < library.textures.size(); ++i)
    for (std::size_t j = i + 1; j < library.textures.size(); ++j)
      if (library.textures[i].id == library.textures[j].id)
        out.push_back("texture " + std::to_string(library.textures[i].id) + ": duplicate id");
  return out;
}

}  // namespace brickasm
