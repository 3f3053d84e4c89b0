#include "brickasm/serialize.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "brickasm/error.hpp"

namespace brickasm {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(Errc::kSchema, (path.empty() ? std::string("/") : path) + ": " + what);
}

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

const Json& object(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  return j;
}

const Json& field(const Json& j, const std::string& path, const char* key) {
  object(j, path);
  auto it = j.find(key);
  if (it == j.end()) fail(child(path, key), "missing field");
  return *it;
}

const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail(path, "integer out of range");
  return static_cast<int>(v);
}

std::uint64_t unsigned_integer(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    fail(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

bool boolean(const Json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string text(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

double num_field(const Json& j, const std::string& path, const char* key) {
  return number(field(j, path, key), child(path, key));
}
int int_field(const Json& j, const std::string& path, const char* key) {
  return integer(field(j, path, key), child(path, key));
}
std::string text_field(const Json& j, const std::string& path, const char* key) {
  return text(field(j, path, key), child(path, key));
}

// Rejects keys outside `allowed`, so typos in overrides do not pass silently.
void only_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  object(j, path);
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) fail(child(path, it.key()), "unknown field");
  }
}

Json vec(const Vec2& v) { return Json::array({v.x(), v.y()}); }
Json vec(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec2 vec2(const Json& j, const std::string& path) {
  array(j, path);
  if (j.size() != 2) fail(path, "expected 2 numbers");
  return Vec2(number(j[0], child(path, 0)), number(j[1], child(path, 1)));
}

Vec3 vec3(const Json& j, const std::string& path) {
  array(j, path);
  if (j.size() != 3) fail(path, "expected 3 numbers");
  return Vec3(number(j[0], child(path, 0)), number(j[1], child(path, 1)), number(j[2], child(path, 2)));
}

Json matrix(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const Json& j, const std::string& path, Eigen::Index rows, Eigen::Index cols) {
  array(j, path);
  if (static_cast<Eigen::Index>(j.size()) != rows) fail(path, "expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::string rp = child(path, static_cast<std::size_t>(r));
    const Json& row = array(j[r], rp);
    if (static_cast<Eigen::Index>(row.size()) != cols) fail(rp, "expected " + std::to_string(cols) + " columns");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number(row[c], child(rp, static_cast<std::size_t>(c)));
  }
  return m;
}

Json column(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(m(r, 0));
  return out;
}

Eigen::MatrixXd column_from(const Json& j, const std::string& path, Eigen::Index rows) {
  array(j, path);
  if (static_cast<Eigen::Index>(j.size()) != rows) fail(path, "expected " + std::to_string(rows) + " entries");
  Eigen::MatrixXd m(rows, 1);
  for (Eigen::Index r = 0; r < rows; ++r) m(r, 0) = number(j[r], child(path, static_cast<std::size_t>(r)));
  return m;
}

Json edges_json(const std::vector<Edge>& edges) {
  Json out = Json::array();
  for (const Edge& e : edges) out.push_back(Json::array({e.from, e.to}));
  return out;
}

std::vector<Edge> edges_from(const Json& j, const std::string& path) {
  std::vector<Edge> out;
  array(j, path);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = child(path, i);
    if (!j[i].is_array() || j[i].size() != 2) fail(p, "expected a pair [from, to]");
    out.push_back({integer(j[i][0], child(p, 0)), integer(j[i][1], child(p, 1))});
  }
  return out;
}

Json offsets_json(const std::vector<GridOffset>& offsets) {
  Json out = Json::array();
  for (const auto& o : offsets) out.push_back(Json::array({o.x, o.y}));
  return out;
}

std::vector<GridOffset> offsets_from(const Json& j, const std::string& path) {
  std::vector<GridOffset> out;
  array(j, path);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = child(path, i);
    if (!j[i].is_array() || j[i].size() != 2) fail(p, "expected a pair [x, y]");
    out.push_back({integer(j[i][0], child(p, 0)), integer(j[i][1], child(p, 1))});
  }
  return out;
}

Json optional_vec(const std::optional<Vec2>& v) { return v ? vec(*v) : Json(nullptr); }

std::optional<Vec2> optional_vec2(const Json& j, const std::string& path) {
  if (j.is_null()) return std::nullopt;
  return vec2(j, path);
}

Json pose_json(const Pose3& p) { return Json{{"position", vec(p.position)}, {"yaw", p.yaw}}; }

Pose3 pose_from(const Json& j, const std::string& path) {
  return Pose3{vec3(field(j, path, "position"), child(path, "position")), num_field(j, path, "yaw")};
}

std::string symmetry_name(Symmetry s) {
  switch (s) {
    case Symmetry::kContinuous: return "continuous";
    case Symmetry::kOne: return "1";
    case Symmetry::kTwo: return "2";
    case Symmetry::kFour: return "4";
  }
  return "1";
}

Symmetry symmetry_from(const Json& j, const std::string& path) {
  const std::string s = text(j, path);
  if (s == "continuous") return Symmetry::kContinuous;
  if (s == "1") return Symmetry::kOne;
  if (s == "2") return Symmetry::kTwo;
  if (s == "4") return Symmetry::kFour;
  fail(path, "expected one of \"1\", \"2\", \"4\", \"continuous\"");
}

Json mlp_json(const Mlp& m) {
  return Json{{"w1", matrix(m.w1)}, {"b1", column(m.b1)}, {"w2", matrix(m.w2)}, {"b2", column(m.b2)}};
}

Mlp mlp_from(const Json& j, const std::string& path, int in, int hidden, int out) {
  Mlp m;
  m.w1 = matrix_from(field(j, path, "w1"), child(path, "w1"), hidden, in);
  m.b1 = column_from(field(j, path, "b1"), child(path, "b1"), hidden);
  m.w2 = matrix_from(field(j, path, "w2"), child(path, "w2"), out, hidden);
  m.b2 = column_from(field(j, path, "b2"), child(path, "b2"), out);
  return m;
}

}  // namespace

Json to_json(const Mask& mask) {
  return Json{{"height", mask.height()}, {"width", mask.width()}, {"runs", mask.runs()}};
}

Mask mask_from_json(const Json& j, const std::string& path) {
  const int h = int_field(j, path, "height");
  const int w = int_field(j, path, "width");
  if (h < 0 || w < 0) fail(path, "negative raster size");
  const Json& runs = array(field(j, path, "runs"), child(path, "runs"));
  std::vector<std::uint32_t> r;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto v = unsigned_integer(runs[i], child(child(path, "runs"), i));
    if (v > std::numeric_limits<std::uint32_t>::max()) fail(child(child(path, "runs"), i), "run too long");
    r.push_back(static_cast<std::uint32_t>(v));
  }
  try {
    return Mask(h, w, std::move(r));
  } catch (const Error&) {
    fail(child(path, "runs"), "runs do not cover exactly height*width cells");
  }
}

Json to_json(const Camera& c) {
  Json rot = Json::array();
  for (int r = 0; r < 3; ++r) rot.push_back(Json::array({c.rotation(r, 0), c.rotation(r, 1), c.rotation(r, 2)}));
  return Json{{"rotation", rot}, {"translation", vec(c.translation)}, {"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx},
              {"cy", c.cy}, {"width", c.width}, {"height", c.height}};
}

Camera camera_from_json(const Json& j, const std::string& path) {
  Camera c;
  c.rotation = matrix_from(field(j, path, "rotation"), child(path, "rotation"), 3, 3);
  c.translation = vec3(field(j, path, "translation"), child(path, "translation"));
  c.fx = num_field(j, path, "fx");
  c.fy = num_field(j, path, "fy");
  c.cx = num_field(j, path, "cx");
  c.cy = num_field(j, path, "cy");
  c.width = int_field(j, path, "width");
  c.height = int_field(j, path, "height");
  return c;
}

Json to_json(const Library& lib) {
  Json shapes = Json::array();
  for (const BrickShape& s : lib.shapes) {
    Json fp = Json::array();
    for (const Vec2& p : s.footprint) fp.push_back(vec(p));
    Json cloud = Json::array();
    for (const Vec3& p : s.point_cloud) cloud.push_back(vec(p));
    Json js{{"id", s.id},
            {"name", s.name},
            {"footprint", fp},
            {"height", s.height},
            {"symmetry", symmetry_name(s.symmetry)},
            {"top", s.top == TopProfile::kRidge ? "ridge" : "flat"},
            {"point_cloud", cloud}};
    if (s.stud_top) js["stud_top"] = offsets_json(*s.stud_top);
    if (s.socket_bottom) js["socket_bottom"] = offsets_json(*s.socket_bottom);
    shapes.push_back(std::move(js));
  }
  Json textures = Json::array();
  for (const BrickTexture& t : lib.textures)
    textures.push_back(Json{{"id", t.id}, {"name", t.name}, {"rgb", Json::array({t.rgb[0], t.rgb[1], t.rgb[2]})}});
  return Json{{"name", lib.name}, {"shapes", shapes}, {"textures", textures}};
}

Library library_from_json(const Json& j, const std::string& path) {
  Library lib;
  lib.name = text_field(j, path, "name");
  const std::string sp = child(path, "shapes");
  const Json& shapes = array(field(j, path, "shapes"), sp);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const std::string p = child(sp, i);
    const Json& js = object(shapes[i], p);
    BrickShape s;
    s.id = int_field(js, p, "id");
    s.name = text_field(js, p, "name");
    const Json& fp = array(field(js, p, "footprint"), child(p, "footprint"));
    for (std::size_t k = 0; k < fp.size(); ++k) s.footprint.push_back(vec2(fp[k], child(child(p, "footprint"), k)));
    s.height = num_field(js, p, "height");
    s.symmetry = symmetry_from(field(js, p, "symmetry"), child(p, "symmetry"));
    const std::string top = text_field(js, p, "top");
    if (top != "flat" && top != "ridge") fail(child(p, "top"), "expected \"flat\" or \"ridge\"");
    s.top = top == "ridge" ? TopProfile::kRidge : TopProfile::kFlat;
    const Json& cloud = array(field(js, p, "point_cloud"), child(p, "point_cloud"));
    for (std::size_t k = 0; k < cloud.size(); ++k)
      s.point_cloud.push_back(vec3(cloud[k], child(child(p, "point_cloud"), k)));
    if (js.contains("stud_top")) s.stud_top = offsets_from(js["stud_top"], child(p, "stud_top"));
    if (js.contains("socket_bottom")) s.socket_bottom = offsets_from(js["socket_bottom"], child(p, "socket_bottom"));
    lib.shapes.push_back(std::move(s));
  }
  const std::string tp = child(path, "textures");
  const Json& textures = array(field(j, path, "textures"), tp);
  for (std::size_t i = 0; i < textures.size(); ++i) {
    const std::string p = child(tp, i);
    BrickTexture t;
    t.id = int_field(textures[i], p, "id");
    t.name = text_field(textures[i], p, "name");
    const Json& rgb = array(field(textures[i], p, "rgb"), child(p, "rgb"));
    if (rgb.size() != 3) fail(child(p, "rgb"), "expected 3 numbers");
    for (int k = 0; k < 3; ++k) t.rgb[k] = number(rgb[k], child(child(p, "rgb"), static_cast<std::size_t>(k)));
    lib.textures.push_back(std::move(t));
  }
  return lib;
}

Json to_json(const Scene& s) {
  Json bricks = Json::array();
  for (const BrickInstance& b : s.bricks)
    bricks.push_back(Json{{"shape", b.shape_id}, {"texture", b.texture_id}, {"pose", pose_json(b.pose)}});
  Json cameras = Json::array();
  for (const Camera& c : s.cameras) cameras.push_back(to_json(c));
  Json ann = Json::array();
  for (const auto& per_brick : s.annotations) {
    Json views = Json::array();
    for (const ViewAnnotation& a : per_brick)
      views.push_back(Json{{"keypoint", optional_vec(a.keypoint)},
                           {"view_rotation", a.view_rotation},
                           {"mask", to_json(a.mask)},
                           {"visible_ratio", a.visible_ratio},
                           {"gt_confidence", a.gt_confidence}});
    ann.push_back(std::move(views));
  }
  return Json{{"name", s.name},       {"style", s.style},   {"library", s.library_ref},
              {"bricks", bricks},     {"support_edges", edges_json(s.support_edges)},
              {"cameras", cameras},   {"annotations", ann}};
}

Scene scene_from_json(const Json& j, const std::string& path) {
  Scene s;
  s.name = text_field(j, path, "name");
  s.style = text_field(j, path, "style");
  s.library_ref = text_field(j, path, "library");
  const std::string bp = child(path, "bricks");
  const Json& bricks = array(field(j, path, "bricks"), bp);
  for (std::size_t i = 0; i < bricks.size(); ++i) {
    const std::string p = child(bp, i);
    s.bricks.push_back({int_field(bricks[i], p, "shape"), int_field(bricks[i], p, "texture"),
                        pose_from(field(bricks[i], p, "pose"), child(p, "pose"))});
  }
  s.support_edges = edges_from(field(j, path, "support_edges"), child(path, "support_edges"));
  const std::string cp = child(path, "cameras");
  const Json& cams = array(field(j, path, "cameras"), cp);
  for (std::size_t i = 0; i < cams.size(); ++i) s.cameras.push_back(camera_from_json(cams[i], child(cp, i)));
  const std::string ap = child(path, "annotations");
  const Json& ann = array(field(j, path, "annotations"), ap);
  for (std::size_t i = 0; i < ann.size(); ++i) {
    const std::string p = child(ap, i);
    const Json& views = array(ann[i], p);
    std::vector<ViewAnnotation> row;
    for (std::size_t v = 0; v < views.size(); ++v) {
      const std::string vp = child(p, v);
      ViewAnnotation a;
      a.keypoint = optional_vec2(field(views[v], vp, "keypoint"), child(vp, "keypoint"));
      a.view_rotation = num_field(views[v], vp, "view_rotation");
      a.mask = mask_from_json(field(views[v], vp, "mask"), child(vp, "mask"));
      a.visible_ratio = num_field(views[v], vp, "visible_ratio");
      a.gt_confidence = num_field(views[v], vp, "gt_confidence");
      row.push_back(std::move(a));
    }
    s.annotations.push_back(std::move(row));
  }
  return s;
}

Json to_json(const PredictionSet& ps) {
  Json bricks = Json::array();
  for (const BrickPrediction& b : ps.bricks) {
    Json views = Json::array();
    for (const ViewPrediction& v : b.views)
      views.push_back(Json{{"keypoint", optional_vec(v.keypoint)},
                           {"rot_sin", v.rot_sin},
                           {"rot_cos", v.rot_cos},
                           {"mask", to_json(v.mask)},
                           {"confidence", v.confidence}});
    bricks.push_back(Json{{"shape", b.shape_id},
                          {"texture", b.texture_id},
                          {"pose", b.pose ? pose_json(*b.pose) : Json(nullptr)},
                          {"low_quality", b.low_quality},
                          {"views", views}});
  }
  return Json{{"scene", ps.scene}, {"predicted_count", ps.predicted_count}, {"bricks", bricks}};
}

PredictionSet predictions_from_json(const Json& j, const std::string& path) {
  PredictionSet ps;
  ps.scene = text_field(j, path, "scene");
  ps.predicted_count = int_field(j, path, "predicted_count");
  const std::string bp = child(path, "bricks");
  const Json& bricks = array(field(j, path, "bricks"), bp);
  for (std::size_t i = 0; i < bricks.size(); ++i) {
    const std::string p = child(bp, i);
    BrickPrediction b;
    b.shape_id = int_field(bricks[i], p, "shape");
    b.texture_id = int_field(bricks[i], p, "texture");
    const Json& pose = field(bricks[i], p, "pose");
    if (!pose.is_null()) b.pose = pose_from(pose, child(p, "pose"));
    b.low_quality = boolean(field(bricks[i], p, "low_quality"), child(p, "low_quality"));
    const std::string vp0 = child(p, "views");
    const Json& views = array(field(bricks[i], p, "views"), vp0);
    for (std::size_t v = 0; v < views.size(); ++v) {
      const std::string vp = child(vp0, v);
      ViewPrediction pv;
      pv.keypoint = optional_vec2(field(views[v], vp, "keypoint"), child(vp, "keypoint"));
      pv.rot_sin = num_field(views[v], vp, "rot_sin");
      pv.rot_cos = num_field(views[v], vp, "rot_cos");
      pv.mask = mask_from_json(field(views[v], vp, "mask"), child(vp, "mask"));
      pv.confidence = num_field(views[v], vp, "confidence");
      b.views.push_back(std::move(pv));
    }
    ps.bricks.push_back(std::move(b));
  }
  return ps;
}

Json to_json(const GcnParams& p) {
  Json layers = Json::array();
  for (const Mlp& m : p.edge_layers) layers.push_back(mlp_json(m));
  return Json{{"feature_width", p.feature_width}, {"hidden", p.hidden}, {"edge_layers", layers},
              {"scorer", mlp_json(p.scorer)}};
}

GcnParams gcn_params_from_json(const Json& j, const std::string& path) {
  GcnParams p;
  p.feature_width = int_field(j, path, "feature_width");
  p.hidden = int_field(j, path, "hidden");
  if (p.feature_width < 1) fail(child(path, "feature_width"), "must be positive");
  if (p.hidden < 1) fail(child(path, "hidden"), "must be positive");
  const std::string lp = child(path, "edge_layers");
  const Json& layers = array(field(j, path, "edge_layers"), lp);
  for (std::size_t i = 0; i < layers.size(); ++i)
    p.edge_layers.push_back(mlp_from(layers[i], child(lp, i), 2 * p.feature_width, p.hidden, p.feature_width));
  p.scorer = mlp_from(field(j, path, "scorer"), child(path, "scorer"), p.feature_width, p.hidden, 1);
  if (!p.all_finite()) fail(path, "parameters must be finite");
  return p;
}

Json to_json(const RelationGraph& g) {
  return Json{{"n", g.n}, {"probs", matrix(g.probs)}, {"accepted", edges_json(g.accepted)}};
}

RelationGraph graph_from_json(const Json& j, const std::string& path) {
  RelationGraph g;
  g.n = int_field(j, path, "n");
  if (g.n < 0) fail(child(path, "n"), "must be >= 0");
  g.probs = matrix_from(field(j, path, "probs"), child(path, "probs"), g.n, g.n);
  g.accepted = edges_from(field(j, path, "accepted"), child(path, "accepted"));
  return g;
}

Json to_json(const Plan& plan) {
  return Json{{"scene", plan.scene}, {"predictions", to_json(plan.predictions)}, {"graph", to_json(plan.graph)},
              {"order", plan.order}};
}

Plan plan_from_json(const Json& j, const std::string& path) {
  Plan plan;
  plan.scene = text_field(j, path, "scene");
  plan.predictions = predictions_from_json(field(j, path, "predictions"), child(path, "predictions"));
  plan.graph = graph_from_json(field(j, path, "graph"), child(path, "graph"));
  const Json& order = array(field(j, path, "order"), child(path, "order"));
  for (std::size_t i = 0; i < order.size(); ++i) plan.order.push_back(integer(order[i], child(child(path, "order"), i)));
  return plan;
}

Json to_json(const SceneEvaluation& e) {
  return Json{{"scene", e.scene},
              {"gt_count", e.gt_count},
              {"predicted_count", e.predicted_count},
              {"prefix", e.prefix},
              {"type_prefix", e.type_prefix},
              {"shape_ok", e.shape_ok},
              {"texture_ok", e.texture_ok},
              {"pos_ok", e.pos_ok},
              {"rot_ok", e.rot_ok},
              {"step_ok", e.step_ok},
              {"kps_sq_sum", e.kps_sq_sum},
              {"kps_count", e.kps_count},
              {"iou_sum", e.iou_sum},
              {"iou_count", e.iou_count},
              {"edge_tp", e.edge_tp},
              {"edge_fp", e.edge_fp},
              {"edge_fn", e.edge_fn}};
}

SceneEvaluation scene_evaluation_from_json(const Json& j, const std::string& path) {
  SceneEvaluation e;
  e.scene = text_field(j, path, "scene");
  e.gt_count = int_field(j, path, "gt_count");
  e.predicted_count = int_field(j, path, "predicted_count");
  e.prefix = int_field(j, path, "prefix");
  e.type_prefix = int_field(j, path, "type_prefix");
  e.shape_ok = int_field(j, path, "shape_ok");
  e.texture_ok = int_field(j, path, "texture_ok");
  e.pos_ok = int_field(j, path, "pos_ok");
  e.rot_ok = int_field(j, path, "rot_ok");
  e.step_ok = int_field(j, path, "step_ok");
  e.kps_sq_sum = num_field(j, path, "kps_sq_sum");
  e.kps_count = int_field(j, path, "kps_count");
  e.iou_sum = num_field(j, path, "iou_sum");
  e.iou_count = int_field(j, path, "iou_count");
  e.edge_tp = int_field(j, path, "edge_tp");
  e.edge_fp = int_field(j, path, "edge_fp");
  e.edge_fn = int_field(j, path, "edge_fn");
  return e;
}

Json to_json(const MetricsReport& r) {
  Json scenes = Json::array();
  for (const auto& s : r.scenes) scenes.push_back(to_json(s));
  return Json{{"complete_rate", r.complete_rate},
              {"per_scene_acc", r.per_scene_acc},
              {"count_acc", r.count_acc},
              {"order_cr", r.order_cr},
              {"per_step_acc", r.per_step_acc},
              {"pos_acc", r.pos_acc},
              {"rot_acc", r.rot_acc},
              {"shape_acc", r.shape_acc},
              {"texture_acc", r.texture_acc},
              {"miou", r.miou},
              {"kps_mse", r.kps_mse},
              {"kps_mse_unit", kKpsMseUnit},
              {"edge_f1", r.edge_f1},
              {"cca_histogram", r.cca_histogram},
              {"scenes", scenes}};
}

MetricsReport report_from_json(const Json& j, const std::string& path) {
  MetricsReport r;
  r.complete_rate = num_field(j, path, "complete_rate");
  r.per_scene_acc = num_field(j, path, "per_scene_acc");
  r.count_acc = num_field(j, path, "count_acc");
  r.order_cr = num_field(j, path, "order_cr");
  r.per_step_acc = num_field(j, path, "per_step_acc");
  r.pos_acc = num_field(j, path, "pos_acc");
  r.rot_acc = num_field(j, path, "rot_acc");
  r.shape_acc = num_field(j, path, "shape_acc");
  r.texture_acc = num_field(j, path, "texture_acc");
  r.miou = num_field(j, path, "miou");
  r.kps_mse = num_field(j, path, "kps_mse");
  r.edge_f1 = num_field(j, path, "edge_f1");
  const std::string hp = child(path, "cca_histogram");
  const Json& hist = array(field(j, path, "cca_histogram"), hp);
  for (std::size_t i = 0; i < hist.size(); ++i) r.cca_histogram.push_back(number(hist[i], child(hp, i)));
  const std::string sp = child(path, "scenes");
  const Json& scenes = array(field(j, path, "scenes"), sp);
  for (std::size_t i = 0; i < scenes.size(); ++i) r.scenes.push_back(scene_evaluation_from_json(scenes[i], child(sp, i)));
  return r;
}

Json to_json(const NoiseConfig& c) {
  return Json{{"keypoint_sigma", c.keypoint_sigma},
              {"label_flip_prob", c.label_flip_prob},
              {"rotation_sigma", c.rotation_sigma},
              {"rotation_flip_prob", c.rotation_flip_prob},
              {"mask_shift_px", c.mask_shift_px},
              {"count_error_prob", c.count_error_prob},
              {"drop_detection_prob", c.drop_detection_prob},
              {"seed", c.seed}};
}

NoiseConfig noise_config_from_json(const Json& j, NoiseConfig c, const std::string& path) {
  only_keys(j, path,
            {"keypoint_sigma", "label_flip_prob", "rotation_sigma", "rotation_flip_prob", "mask_shift_px",
             "count_error_prob", "drop_detection_prob", "seed"});
  if (j.contains("keypoint_sigma")) c.keypoint_sigma = num_field(j, path, "keypoint_sigma");
  if (j.contains("label_flip_prob")) c.label_flip_prob = num_field(j, path, "label_flip_prob");
  if (j.contains("rotation_sigma")) c.rotation_sigma = num_field(j, path, "rotation_sigma");
  if (j.contains("rotation_flip_prob")) c.rotation_flip_prob = num_field(j, path, "rotation_flip_prob");
  if (j.contains("mask_shift_px")) c.mask_shift_px = int_field(j, path, "mask_shift_px");
  if (j.contains("count_error_prob")) c.count_error_prob = num_field(j, path, "count_error_prob");
  if (j.contains("drop_detection_prob")) c.drop_detection_prob = num_field(j, path, "drop_detection_prob");
  if (j.contains("seed")) c.seed = unsigned_integer(j["seed"], child(path, "seed"));
  try {
    c.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return c;
}

Json to_json(const CameraSampling& c) {
  return Json{{"count", c.count},
              {"distance", c.distance},
              {"jitter_radius", c.jitter_radius},
              {"azimuth_spread_deg", c.azimuth_spread_deg},
              {"elevation_deg", c.elevation_deg},
              {"elevation_spread_deg", c.elevation_spread_deg},
              {"focal", c.focal},
              {"width", c.width},
              {"height", c.height}};
}

CameraSampling camera_sampling_from_json(const Json& j, CameraSampling c, const std::string& path) {
  only_keys(j, path,
            {"count", "distance", "jitter_radius", "azimuth_spread_deg", "elevation_deg", "elevation_spread_deg",
             "focal", "width", "height"});
  if (j.contains("count")) c.count = int_field(j, path, "count");
  if (j.contains("distance")) c.distance = num_field(j, path, "distance");
  if (j.contains("jitter_radius")) c.jitter_radius = num_field(j, path, "jitter_radius");
  if (j.contains("azimuth_spread_deg")) c.azimuth_spread_deg = num_field(j, path, "azimuth_spread_deg");
  if (j.contains("elevation_deg")) c.elevation_deg = num_field(j, path, "elevation_deg");
  if (j.contains("elevation_spread_deg")) c.elevation_spread_deg = num_field(j, path, "elevation_spread_deg");
  if (j.contains("focal")) c.focal = num_field(j, path, "focal");
  if (j.contains("width")) c.width = int_field(j, path, "width");
  if (j.contains("height")) c.height = int_field(j, path, "height");
  if (c.count < 1) fail(child(path, "count"), "must be >= 1");
  if (!(c.focal > 0.0)) fail(child(path, "focal"), "must be positive");
  if (c.width < 1 || c.height < 1) fail(path, "raster size must be positive");
  return c;
}

Json to_json(const GenConfig& c) {
  return Json{{"style", to_string(c.style)},
              {"min_bricks", c.min_bricks},
              {"max_bricks", c.max_bricks},
              {"area_min", c.area_min},
              {"area_max", c.area_max},
              {"max_retries", c.max_retries},
              {"seed", c.seed},
              {"stack_prob", c.stack_prob},
              {"stack_sigma", c.stack_sigma},
              {"cameras", to_json(c.cameras)},
              {"max_scene_attempts", c.max_scene_attempts}};
}

GenConfig gen_config_from_json(const Json& j, GenConfig c, const std::string& path) {
  only_keys(j, path,
            {"style", "min_bricks", "max_bricks", "area_min", "area_max", "max_retries", "seed", "stack_prob",
             "stack_sigma", "cameras", "max_scene_attempts"});
  if (j.contains("style")) {
    try {
      c.style = style_from_string(text_field(j, path, "style"));
    } catch (const Error& e) {
      fail(child(path, "style"), e.what());
    }
  }
  if (j.contains("min_bricks")) c.min_bricks = int_field(j, path, "min_bricks");
  if (j.contains("max_bricks")) c.max_bricks = int_field(j, path, "max_bricks");
  if (j.contains("area_min")) c.area_min = num_field(j, path, "area_min");
  if (j.contains("area_max")) c.area_max = num_field(j, path, "area_max");
  if (j.contains("max_retries")) c.max_retries = int_field(j, path, "max_retries");
  if (j.contains("seed")) c.seed = unsigned_integer(j["seed"], child(path, "seed"));
  if (j.contains("stack_prob")) c.stack_prob = num_field(j, path, "stack_prob");
  if (j.contains("stack_sigma")) c.stack_sigma = num_field(j, path, "stack_sigma");
  if (j.contains("cameras")) c.cameras = camera_sampling_from_json(j["cameras"], c.cameras, child(path, "cameras"));
  if (j.contains("max_scene_attempts")) c.max_scene_attempts = int_field(j, path, "max_scene_attempts");
  try {
    c.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return c;
}

Json to_json(const TrainConfig& c) {
  return Json{{"epochs", c.epochs},
              {"learning_rate", c.learning_rate},
              {"lr_decay", c.lr_decay},
              {"weight_decay", c.weight_decay},
              {"batch_size", c.batch_size},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"adam_epsilon", c.adam_epsilon},
              {"seed", c.seed},
              {"layers", c.layers},
              {"hidden", c.hidden},
              {"loss_epsilon", c.loss.epsilon},
              {"positive_weight", c.loss.positive_weight}};
}

TrainConfig train_config_from_json(const Json& j, TrainConfig c, const std::string& path) {
  only_keys(j, path,
            {"epochs", "learning_rate", "lr_decay", "weight_decay", "batch_size", "beta1", "beta2", "adam_epsilon",
             "seed", "layers", "hidden", "loss_epsilon", "positive_weight"});
  if (j.contains("epochs")) c.epochs = int_field(j, path, "epochs");
  if (j.contains("learning_rate")) c.learning_rate = num_field(j, path, "learning_rate");
  if (j.contains("lr_decay")) c.lr_decay = num_field(j, path, "lr_decay");
  if (j.contains("weight_decay")) c.weight_decay = num_field(j, path, "weight_decay");
  if (j.contains("batch_size")) c.batch_size = int_field(j, path, "batch_size");
  if (j.contains("beta1")) c.beta1 = num_field(j, path, "beta1");
  if (j.contains("beta2")) c.beta2 = num_field(j, path, "beta2");
  if (j.contains("adam_epsilon")) c.adam_epsilon = num_field(j, path, "adam_epsilon");
  if (j.contains("seed")) c.seed = unsigned_integer(j["seed"], child(path, "seed"));
  if (j.contains("layers")) c.layers = int_field(j, path, "layers");
  if (j.contains("hidden")) c.hidden = int_field(j, path, "hidden");
  if (j.contains("loss_epsilon")) c.loss.epsilon = num_field(j, path, "loss_epsilon");
  if (j.contains("positive_weight")) c.loss.positive_weight = num_field(j, path, "positive_weight");
  if (c.epochs < 0) fail(child(path, "epochs"), "must be >= 0");
  if (c.batch_size < 1) fail(child(path, "batch_size"), "must be >= 1");
  if (c.layers < 1 || c.hidden < 1) fail(path, "layers and hidden must be positive");
  return c;
}

Json to_json(const Tolerances& t) { return Json{{"position", t.position}, {"rotation_deg", t.rotation_deg}}; }

Tolerances tolerances_from_json(const Json& j, Tolerances t, const std::string& path) {
  only_keys(j, path, {"position", "rotation_deg"});
  if (j.contains("position")) t.position = num_field(j, path, "position");
  if (j.contains("rotation_deg")) t.rotation_deg = num_field(j, path, "rotation_deg");
  if (!(t.position > 0.0) || !(t.rotation_deg > 0.0)) fail(path, "tolerances must be positive");
  return t;
}

Json to_json(const SolveOptions& o) {
  return Json{{"theta", o.recovery.theta},
              {"working_center", vec(o.recovery.working_center)},
              {"min_angle_deg", o.recovery.triangulation.min_angle_deg},
              {"huber_delta", o.recovery.triangulation.huber_delta},
              {"max_iterations", o.recovery.triangulation.max_iterations},
              {"plan_stop", o.plan.stop == PlanStop::kThreshold ? "threshold" : "reach-all"},
              {"plan_threshold", o.plan.threshold},
              {"graph", to_string(o.graph)}};
}

SolveOptions solve_options_from_json(const Json& j, SolveOptions o, const std::string& path) {
  only_keys(j, path,
            {"theta", "working_center", "min_angle_deg", "huber_delta", "max_iterations", "plan_stop",
             "plan_threshold", "graph"});
  if (j.contains("theta")) o.recovery.theta = num_field(j, path, "theta");
  if (j.contains("working_center")) o.recovery.working_center = vec3(j["working_center"], child(path, "working_center"));
  if (j.contains("min_angle_deg")) o.recovery.triangulation.min_angle_deg = num_field(j, path, "min_angle_deg");
  if (j.contains("huber_delta")) o.recovery.triangulation.huber_delta = num_field(j, path, "huber_delta");
  if (j.contains("max_iterations")) o.recovery.triangulation.max_iterations = int_field(j, path, "max_iterations");
  if (j.contains("plan_stop")) {
    const std::string s = text_field(j, path, "plan_stop");
    if (s == "threshold") o.plan.stop = PlanStop::kThreshold;
    else if (s == "reach-all") o.plan.stop = PlanStop::kReachAll;
    else fail(child(path, "plan_stop"), "expected \"threshold\" or \"reach-all\"");
  }
  if (j.contains("plan_threshold")) o.plan.threshold = num_field(j, path, "plan_threshold");
  if (j.contains("graph")) {
    try {
      o.graph = graph_source_from_string(text_field(j, path, "graph"));
    } catch (const Error& e) {
      fail(child(path, "graph"), e.what());
    }
  }
  return o;
}

Json envelope(const std::string& format, Json payload, Json config) {
  return Json{{"format", format},
              {"version", kFormatVersion},
              {"meta", Json{{"tool_version", kToolVersion}, {"config", std::move(config)}}},
              {"data", std::move(payload)}};
}

const Json& open_envelope(const Json& doc, const std::string& format) {
  const std::string got = text_field(doc, "", "format");
  if (got != format) fail("/format", "expected \"" + format + "\", found \"" + got + "\"");
  const int version = int_field(doc, "", "version");
  if (version != kFormatVersion) fail("/version", "unsupported version " + std::to_string(version));
  return field(doc, "", "data");
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kInvalidArgument, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::kSchema, path.string() + ": not valid JSON (" + e.what() + ")");
  }
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kInvalidArgument, "cannot write " + path.string());
  out << dump(doc);
  if (!out) throw Error(Errc::kInvalidArgument, "write failed for " + path.string());
}

}  // namespace brickasm
