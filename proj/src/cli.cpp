#include "brickasm/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "brickasm/error.hpp"
#include "brickasm/metrics.hpp"
#include "brickasm/pipeline.hpp"
#include "brickasm/planner.hpp"
#include "brickasm/relgcn.hpp"
#include "brickasm/scenegen.hpp"
#include "brickasm/serialize.hpp"
#include "brickasm/stub.hpp"

namespace fs = std::filesystem;

namespace brickasm {

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kInvalidArgument, "cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error(Errc::kInvalidArgument, "sha256 unavailable");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

namespace {

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kLibraryName = "library.json";

// Every tunable, resolved from defaults, the config file and flags in that order.
struct Config {
  GenConfig gen;
  NoiseConfig noise;
  TrainConfig train;
  SolveOptions solve;
  Tolerances tolerances;
  int raster_height = 224;
  int raster_width = 224;
};

Json to_json(const Config& c) {
  return Json{{"gen", brickasm::to_json(c.gen)},
              {"noise", brickasm::to_json(c.noise)},
              {"train", brickasm::to_json(c.train)},
              {"solve", brickasm::to_json(c.solve)},
              {"tolerances", brickasm::to_json(c.tolerances)},
              {"raster", Json{{"height", c.raster_height}, {"width", c.raster_width}}}};
}

void apply_overrides(Config& c, const Json& j) {
  if (!j.is_object()) throw Error(Errc::kSchema, "config: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const std::string path = "/" + key;
    if (key == "gen") c.gen = gen_config_from_json(*it, c.gen, path);
    else if (key == "noise") c.noise = noise_config_from_json(*it, c.noise, path);
    else if (key == "train") c.train = train_config_from_json(*it, c.train, path);
    else if (key == "solve") c.solve = solve_options_from_json(*it, c.solve, path);
    else if (key == "tolerances") c.tolerances = tolerances_from_json(*it, c.tolerances, path);
    else if (key == "raster") {
      for (auto r = it->begin(); r != it->end(); ++r) {
        if (!r->is_number_integer() || r->get<int>() < 1)
          throw Error(Errc::kSchema, path + "/" + r.key() + ": expected a positive integer");
        if (r.key() == "height") c.raster_height = r->get<int>();
        else if (r.key() == "width") c.raster_width = r->get<int>();
        else throw Error(Errc::kSchema, path + "/" + r.key() + ": unknown field");
      }
    } else {
      throw Error(Errc::kSchema, path + ": unknown field");
    }
  }
}

struct Entry {
  std::string path;  // relative to the manifest directory
  std::string sha256;
};

struct Manifest {
  fs::path dir;
  std::string kind;
  std::vector<Entry> files;
};

fs::path manifest_path(const fs::path& p) { return fs::is_directory(p) ? p / kManifestName : p; }

Manifest read_manifest(const fs::path& where) {
  const fs::path path = manifest_path(where);
  if (!fs::exists(path)) throw Error(Errc::kInvalidArgument, "no manifest at " + path.string());
  const Json doc = read_json_file(path);
  const Json& data = open_envelope(doc, formats::kManifest);
  Manifest m;
  m.dir = path.parent_path();
  if (!data.contains("kind") || !data["kind"].is_string()) throw Error(Errc::kSchema, "/data/kind: missing field");
  m.kind = data["kind"].get<std::string>();
  if (!data.contains("files") || !data["files"].is_array()) throw Error(Errc::kSchema, "/data/files: missing field");
  for (std::size_t i = 0; i < data["files"].size(); ++i) {
    const Json& f = data["files"][i];
    const std::string p = "/data/files/" + std::to_string(i);
    if (!f.is_object() || !f.contains("path") || !f["path"].is_string() || !f.contains("sha256") ||
        !f["sha256"].is_string())
      throw Error(Errc::kSchema, p + ": expected {path, sha256}");
    Entry e{f["path"].get<std::string>(), f["sha256"].get<std::string>()};
    const fs::path file = m.dir / e.path;
    if (!fs::exists(file)) throw Error(Errc::kSchema, p + "/path: " + file.string() + " does not exist");
    if (sha256_file(file) != e.sha256) throw Error(Errc::kSchema, p + "/sha256: digest mismatch for " + file.string());
    m.files.push_back(std::move(e));
  }
  return m;
}

void write_manifest(const fs::path& dir, const std::string& kind, std::vector<std::string> files, const Json& config) {
  std::sort(files.begin(), files.end());
  Json list = Json::array();
  for (const auto& f : files) list.push_back(Json{{"path", f}, {"sha256", sha256_file(dir / f)}});
  write_json_file(dir / kManifestName, envelope(formats::kManifest, Json{{"kind", kind}, {"files", list}}, config));
}

// Runs fn(i) for i in [0, n) on `jobs` threads; rethrows the failure with the lowest index.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

const Library& library_for(const std::string& ref, const fs::path& dir) {
  static std::mutex mu;
  static std::map<std::string, Library> loaded;
  if (ref == "clevr" || ref == "lego") return builtin_library(ref);
  const fs::path file = dir / ref;
  std::lock_guard lock(mu);
  auto it = loaded.find(file.string());
  if (it == loaded.end()) {
    Library lib = library_from_json(open_envelope(read_json_file(file), formats::kLibrary), "/data");
    const auto problems = validate_library(lib);
    if (!problems.empty()) throw Error(Errc::kSchema, file.string() + ": " + problems.front());
    it = loaded.emplace(file.string(), std::move(lib)).first;
  }
  return it->second;
}

Scene load_scene(const fs::path& file) {
  Scene s = scene_from_json(open_envelope(read_json_file(file), formats::kScene), "/data");
  const Library& lib = library_for(s.library_ref, file.parent_path());
  const auto violations = validate_scene(s, lib);
  if (!violations.empty())
    throw Error(Errc::kSchema, file.string() + ": " + violations.front().subject + ": " + violations.front().message);
  return s;
}

std::vector<Scene> load_scenes(const Manifest& m) {
  std::vector<Scene> scenes;
  for (const Entry& e : m.files)
    if (e.path != kLibraryName) scenes.push_back(load_scene(m.dir / e.path));
  return scenes;
}

void require_kind(const Manifest& m, std::initializer_list<const char*> kinds) {
  for (const char* k : kinds)
    if (m.kind == k) return;
  throw Error(Errc::kSchema, (m.dir / kManifestName).string() + ": unexpected manifest kind \"" + m.kind + "\"");
}

struct Globals {
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string config_path;
};

Config resolve_config(const Globals& g) {
  Config c;
  std::string path = g.config_path;
  if (path.empty())
    if (const char* env = std::getenv(kConfigEnv)) path = env;
  if (!path.empty()) apply_overrides(c, read_json_file(path));
  if (g.seed) {
    c.gen.seed = *g.seed;
    c.noise.seed = *g.seed;
    c.train.seed = *g.seed;
  }
  return c;
}

Json config_record(const std::string& command, const Config& c, const Globals& g) {
  Json j = to_json(c);
  j["command"] = command;
  j["jobs"] = g.jobs;
  return j;
}

// ---- subcommands --------------------------------------------------------------

int cmd_gen(Config c, const Globals& g, const std::string& style, int count, const fs::path& out) {
  if (!style.empty()) c.gen.style = style_from_string(style);
  if (count < 0) throw Error(Errc::kInvalidArgument, "--count must be >= 0");
  c.gen.validate();
  const Library& lib = builtin_library(to_string(c.gen.style));
  const Json record = config_record("gen", c, g);
  fs::create_directories(out);
  std::vector<std::string> files(count);
  parallel_for(static_cast<std::size_t>(count), g.jobs, [&](std::size_t i) {
    const Scene s = generate_scene(lib, c.gen, i);
    files[i] = s.name + ".json";
    write_json_file(out / files[i], envelope(formats::kScene, to_json(s), record));
  });
  write_json_file(out / kLibraryName, envelope(formats::kLibrary, to_json(lib), record));
  files.push_back(kLibraryName);
  write_manifest(out, "scenes", files, record);
  std::cout << "wrote " << count << " scenes to " << out.string() << "\n";
  return kExitOk;
}

int cmd_annotate(const Config& c, const Globals& g, const fs::path& in, const fs::path& out) {
  const Manifest m = read_manifest(in);
  require_kind(m, {"scenes"});
  const Json record = config_record("annotate", c, g);
  fs::create_directories(out);
  std::vector<std::string> files;
  for (const Entry& e : m.files) files.push_back(e.path);
  parallel_for(files.size(), g.jobs, [&](std::size_t i) {
    if (files[i] == kLibraryName) {
      fs::copy_file(m.dir / files[i], out / files[i], fs::copy_options::overwrite_existing);
      return;
    }
    const Scene s = load_scene(m.dir / files[i]);
    const Library& lib = library_for(s.library_ref, m.dir);
    const Scene a = annotate(s, lib, c.raster_height, c.raster_width);
    write_json_file(out / files[i], envelope(formats::kScene, to_json(a), record));
  });
  write_manifest(out, "scenes", files, record);
  std::cout << "annotated " << files.size() - std::count(files.begin(), files.end(), kLibraryName) << " scenes into "
            << out.string() << "\n";
  return kExitOk;
}

int cmd_stats(const Config& c, const Globals& g, const fs::path& in, const std::string& out) {
  const Manifest m = read_manifest(in);
  require_kind(m, {"scenes"});
  const auto scenes = load_scenes(m);
  const DatasetStats st = dataset_stats(scenes);
  std::cout << "scenes " << st.scenes << "\nmean_bricks " << st.mean_bricks << "\nmean_visibility "
            << st.mean_visibility << "\nmean_depth " << st.mean_depth << "\n";
  if (!out.empty())
    write_json_file(out, envelope("brickasm.stats",
                                  Json{{"scenes", st.scenes},
                                       {"mean_bricks", st.mean_bricks},
                                       {"mean_visibility", st.mean_visibility},
                                       {"mean_depth", st.mean_depth}},
                                  config_record("stats", c, g)));
  return kExitOk;
}

int cmd_perturb(Config c, const Globals& g, const fs::path& in, const fs::path& out, const std::string& preset,
                const std::string& noise_file) {
  if (!preset.empty()) {
    const std::uint64_t seed = c.noise.seed;
    c.noise = noise_preset(preset);
    c.noise.seed = seed;
  }
  if (!noise_file.empty()) {
    const Json doc = read_json_file(noise_file);
    const Json& body = doc.contains("format") ? open_envelope(doc, formats::kNoise) : doc;
    c.noise = noise_config_from_json(body, c.noise, "/data");
  }
  if (g.seed) c.noise.seed = *g.seed;
  c.noise.validate();
  const Manifest m = read_manifest(in);
  require_kind(m, {"scenes"});
  const Json record = config_record("perturb", c, g);
  fs::create_directories(out);
  std::vector<std::string> files;
  for (const Entry& e : m.files)
    if (e.path != kLibraryName) files.push_back(e.path);
  parallel_for(files.size(), g.jobs, [&](std::size_t i) {
    const Scene s = load_scene(m.dir / files[i]);
    if (!s.annotated()) throw Error(Errc::kSchema, files[i] + ": scene is not annotated");
    const PredictionSet p = perturb(s, library_for(s.library_ref, m.dir), c.noise);
    write_json_file(out / files[i], envelope(formats::kPredictions, to_json(p), record));
  });
  write_manifest(out, "predictions", files, record);
  std::cout << "perturbed " << files.size() << " scenes into " << out.string() << "\n";
  return kExitOk;
}

int cmd_train(Config c, const Globals& g, const fs::path& data, const fs::path& out, int epochs) {
  if (epochs >= 0) c.train.epochs = epochs;
  const Manifest m = read_manifest(data);
  require_kind(m, {"scenes"});
  const auto scenes = load_scenes(m);
  if (scenes.empty()) throw Error(Errc::kEmptyDataset, "no scenes in " + m.dir.string());
  const Library& lib = library_for(scenes.front().library_ref, m.dir);
  std::vector<TrainSample> samples;
  for (const Scene& s : scenes) {
    if (s.library_ref != scenes.front().library_ref)
      throw Error(Errc::kInvalidArgument, "training scenes must share one library");
    samples.push_back({node_features(s.bricks, lib), s.support_edges, static_cast<int>(s.bricks.size())});
  }
  TrainLog log;
  const GcnParams params = train(samples, c.train, &log);
  Json payload = to_json(params);
  payload["library"] = scenes.front().library_ref;
  payload["training_log"] = Json{{"epoch_loss", log.epoch_loss}, {"steps", log.steps}};
  write_json_file(out, envelope(formats::kGcnParams, payload, config_record("train-gcn", c, g)));
  for (std::size_t e = 0; e < log.epoch_loss.size(); ++e)
    std::cout << "epoch " << e + 1 << " loss " << log.epoch_loss[e] << "\n";
  return kExitOk;
}

std::optional<GcnParams> load_params(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return gcn_params_from_json(open_envelope(read_json_file(path), formats::kGcnParams), "/data");
}

PredictionSet load_predictions(const fs::path& file) {
  return predictions_from_json(open_envelope(read_json_file(file), formats::kPredictions), "/data");
}

Plan solve_one(const Scene& scene, const PredictionSet& p, const Library& lib, const std::optional<GcnParams>& params,
               const SolveOptions& opts) {
  if (p.scene != scene.name)
    throw Error(Errc::kSchema, "predictions are for scene \"" + p.scene + "\", not \"" + scene.name + "\"");
  return solve(scene, p, lib, params ? &*params : nullptr, opts);
}

int cmd_solve(Config c, const Globals& g, const fs::path& scene_in, const fs::path& pred_in, const std::string& params_path,
              const fs::path& out, const std::string& graph) {
  if (!graph.empty()) c.solve.graph = graph_source_from_string(graph);
  else if (params_path.empty()) c.solve.graph = GraphSource::kGtIndicator;
  const auto params = load_params(params_path);
  if (c.solve.graph == GraphSource::kGcn && !params)
    throw Error(Errc::kInvalidArgument, "--graph gcn needs --params");
  const Json record = config_record("solve", c, g);

  if (!fs::is_directory(scene_in)) {
    const Scene s = load_scene(scene_in);
    const Plan plan = solve_one(s, load_predictions(pred_in), library_for(s.library_ref, scene_in.parent_path()),
                                params, c.solve);
    write_json_file(out, envelope(formats::kPlan, to_json(plan), record));
    std::cout << "order";
    for (int b : plan.order) std::cout << " " << b;
    std::cout << "\n";
    return kExitOk;
  }

  const Manifest sm = read_manifest(scene_in);
  const Manifest pm = read_manifest(pred_in);
  require_kind(sm, {"scenes"});
  require_kind(pm, {"predictions"});
  fs::create_directories(out);
  std::vector<std::string> files;
  for (const Entry& e : pm.files) files.push_back(e.path);
  parallel_for(files.size(), g.jobs, [&](std::size_t i) {
    const Scene s = load_scene(sm.dir / files[i]);
    const Plan plan =
        solve_one(s, load_predictions(pm.dir / files[i]), library_for(s.library_ref, sm.dir), params, c.solve);
    write_json_file(out / files[i], envelope(formats::kPlan, to_json(plan), record));
  });
  write_manifest(out, "plans", files, record);
  std::cout << "solved " << files.size() << " scenes into " << out.string() << "\n";
  return kExitOk;
}

int cmd_eval(Config c, const Globals& g, const fs::path& pred_in, const fs::path& gt_in, const fs::path& report,
             const std::string& params_path, const std::string& graph) {
  if (!graph.empty()) c.solve.graph = graph_source_from_string(graph);
  else if (params_path.empty()) c.solve.graph = GraphSource::kGtIndicator;
  const auto params = load_params(params_path);
  const Manifest pm = read_manifest(pred_in);
  const Manifest gm = read_manifest(gt_in);
  require_kind(pm, {"plans", "predictions"});
  require_kind(gm, {"scenes"});
  if (pm.kind == "predictions" && c.solve.graph == GraphSource::kGcn && !params)
    throw Error(Errc::kInvalidArgument, "--graph gcn needs --params");
  std::vector<std::string> files;
  for (const Entry& e : pm.files) files.push_back(e.path);
  std::vector<SceneEvaluation> evals(files.size());
  parallel_for(files.size(), g.jobs, [&](std::size_t i) {
    const Scene s = load_scene(gm.dir / files[i]);
    const Library& lib = library_for(s.library_ref, gm.dir);
    Plan plan;
    if (pm.kind == "plans") {
      plan = plan_from_json(open_envelope(read_json_file(pm.dir / files[i]), formats::kPlan), "/data");
      if (plan.scene != s.name) throw Error(Errc::kSchema, files[i] + ": plan is for scene \"" + plan.scene + "\"");
    } else {
      plan = solve_one(s, load_predictions(pm.dir / files[i]), lib, params, c.solve);
    }
    if (!s.annotated()) throw Error(Errc::kSchema, files[i] + ": ground-truth scene is not annotated");
    evals[i] = evaluate_scene(plan.predictions, s, lib, plan.order, plan.graph.accepted, c.tolerances);
  });
  const MetricsReport r = aggregate(evals);
  write_json_file(report, envelope(formats::kReport, to_json(r), config_record("eval", c, g)));
  std::cout << std::setprecision(6) << "complete_rate " << r.complete_rate << "\nper_scene_acc " << r.per_scene_acc
            << "\ncount_acc " << r.count_acc << "\norder_cr " << r.order_cr << "\nper_step_acc " << r.per_step_acc
            << "\npos_acc " << r.pos_acc << "\nrot_acc " << r.rot_acc << "\nshape_acc " << r.shape_acc
            << "\ntexture_acc " << r.texture_acc << "\nmiou " << r.miou << "\nkps_mse " << r.kps_mse << " ("
            << kKpsMseUnit << ")\nedge_f1 " << r.edge_f1 << "\n";
  return kExitOk;
}

int cmd_cca(const fs::path& report, const fs::path& csv) {
  const MetricsReport r = report_from_json(open_envelope(read_json_file(report), formats::kReport), "/data");
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  std::ofstream out(csv, std::ios::trunc);
  if (!out) throw Error(Errc::kInvalidArgument, "cannot write " + csv.string());
  out << "prefix_length,probability\n";
  for (std::size_t k = 0; k < r.cca_histogram.size(); ++k) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, r.cca_histogram[k]);
    out << k << "," << std::string_view(buf, res.ptr - buf) << "\n";
  }
  std::cout << "wrote " << r.cca_histogram.size() << " rows to " << csv.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Multi-view brick assembly: scene generation, pose recovery, relation graphs and planning"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Base seed for generation, noise and training");
  app.add_option("--jobs", g.jobs, "Parallel scene workers")->check(CLI::PositiveNumber);
  app.add_option("--config", g.config_path, std::string("JSON overrides (default: $") + kConfigEnv + ")");
  app.set_version_flag("--version", kToolVersion);

  std::string style, in, out, preset, noise_file, data, scene, pred, params, graph, gt, report, csv;
  int count = -1, epochs = -1;

  auto* gen = app.add_subcommand("gen", "Generate scenes");
  gen->add_option("--style", style, "clevr or lego");
  gen->add_option("--count", count, "Number of scenes")->required();
  gen->add_option("--out", out, "Output directory")->required();

  auto* ann = app.add_subcommand("annotate", "Render keypoints, masks and visibility");
  ann->add_option("--in", in, "Scene directory")->required();
  ann->add_option("--out", out, "Output directory")->required();

  auto* stats = app.add_subcommand("stats", "Dataset statistics");
  stats->add_option("--in", in, "Annotated scene directory")->required();
  stats->add_option("--out", out, "Optional JSON output");

  auto* pert = app.add_subcommand("perturb", "Simulate noisy perception");
  pert->add_option("--in", in, "Annotated scene directory")->required();
  pert->add_option("--out", out, "Output directory")->required();
  pert->add_option("--preset", preset, "noiseless, mild or harsh")
      ->check(CLI::IsMember({"noiseless", "mild", "harsh"}));
  pert->add_option("--noise", noise_file, "Noise config JSON");

  auto* tr = app.add_subcommand("train-gcn", "Train the relation network");
  tr->add_option("--data", data, "Scene manifest or directory")->required();
  tr->add_option("--out", out, "Parameter file")->required();
  tr->add_option("--epochs", epochs, "Override the epoch count");

  auto* sol = app.add_subcommand("solve", "Recover poses and plan");
  sol->add_option("--scene", scene, "Scene file or directory")->required();
  sol->add_option("--pred", pred, "Prediction file or directory")->required();
  sol->add_option("--params", params, "Relation network parameters");
  sol->add_option("--graph", graph, "gcn or gt-indicator")->check(CLI::IsMember({"gcn", "gt-indicator"}));
  sol->add_option("--out", out, "Plan file or directory")->required();

  auto* ev = app.add_subcommand("eval", "Score plans or predictions");
  ev->add_option("--pred", pred, "Plan or prediction directory")->required();
  ev->add_option("--gt", gt, "Annotated scene directory")->required();
  ev->add_option("--report", report, "Report file")->required();
  ev->add_option("--params", params, "Relation network parameters (prediction input)");
  ev->add_option("--graph", graph, "gcn or gt-indicator")->check(CLI::IsMember({"gcn", "gt-indicator"}));

  auto* cc = app.add_subcommand("cca", "Export the CCA histogram");
  cc->add_option("--report", report, "Report file")->required();
  cc->add_option("--csv", csv, "CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    const Config c = resolve_config(g);
    if (gen->parsed()) return cmd_gen(c, g, style, count, out);
    if (ann->parsed()) return cmd_annotate(c, g, in, out);
    if (stats->parsed()) return cmd_stats(c, g, in, out);
    if (pert->parsed()) return cmd_perturb(c, g, in, out, preset, noise_file);
    if (tr->parsed()) return cmd_train(c, g, data, out, epochs);
    if (sol->parsed()) return cmd_solve(c, g, scene, pred, params, out, graph);
    if (ev->parsed()) return cmd_eval(c, g, pred, gt, report, params, graph);
    if (cc->parsed()) return cmd_cca(report, csv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool validation = e.code() == Errc::kSchema || e.code() == Errc::kInvalidArgument;
    return validation ? kExitValidation : kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace brickasm
