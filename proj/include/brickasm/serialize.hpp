#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "brickasm/metrics.hpp"
#include "brickasm/model.hpp"
#include "brickasm/pipeline.hpp"
#include "brickasm/relgcn.hpp"
#include "brickasm/scenegen.hpp"
#include "brickasm/stub.hpp"

namespace brickasm {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// Format tags written into every artifact.
namespace formats {
inline constexpr const char* kLibrary = "brickasm.library";
inline constexpr const char* kScene = "brickasm.scene";
inline constexpr const char* kPredictions = "brickasm.predictions";
inline constexpr const char* kGcnParams = "brickasm.gcn_params";
inline constexpr const char* kPlan = "brickasm.plan";
inline constexpr const char* kReport = "brickasm.report";
inline constexpr const char* kManifest = "brickasm.manifest";
inline constexpr const char* kNoise = "brickasm.noise";
}  // namespace formats

// Payload encoders/decoders. Decoders throw Error(kSchema) with a JSON pointer
// to the offending field.
Json to_json(const Mask& mask);
Mask mask_from_json(const Json& j, const std::string& path = "");
Json to_json(const Camera& camera);
Camera camera_from_json(const Json& j, const std::string& path = "");
Json to_json(const Library& library);
Library library_from_json(const Json& j, const std::string& path = "");
Json to_json(const Scene& scene);
Scene scene_from_json(const Json& j, const std::string& path = "");
Json to_json(const PredictionSet& predictions);
PredictionSet predictions_from_json(const Json& j, const std::string& path = "");
Json to_json(const GcnParams& params);
GcnParams gcn_params_from_json(const Json& j, const std::string& path = "");
Json to_json(const RelationGraph& graph);
RelationGraph graph_from_json(const Json& j, const std::string& path = "");
Json to_json(const Plan& plan);
Plan plan_from_json(const Json& j, const std::string& path = "");
Json to_json(const SceneEvaluation& eval);
SceneEvaluation scene_evaluation_from_json(const Json& j, const std::string& path = "");
Json to_json(const MetricsReport& report);
MetricsReport report_from_json(const Json& j, const std::string& path = "");

// Configs read as overrides on top of `base`; unknown keys are schema errors.
Json to_json(const NoiseConfig& cfg);
NoiseConfig noise_config_from_json(const Json& j, NoiseConfig base = {}, const std::string& path = "");
Json to_json(const CameraSampling& cfg);
CameraSampling camera_sampling_from_json(const Json& j, CameraSampling base, const std::string& path = "");
Json to_json(const GenConfig& cfg);
GenConfig gen_config_from_json(const Json& j, GenConfig base = {}, const std::string& path = "");
Json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const Json& j, TrainConfig base = {}, const std::string& path = "");
Json to_json(const Tolerances& tol);
Tolerances tolerances_from_json(const Json& j, Tolerances base = {}, const std::string& path = "");
Json to_json(const SolveOptions& opts);
SolveOptions solve_options_from_json(const Json& j, SolveOptions base = {}, const std::string& path = "");

/// {"format", "version", "meta": {"tool_version", "config"}, "data": payload}.
Json envelope(const std::string& format, Json payload, Json config = Json::object());
/// Checks format and version and returns the payload.
const Json& open_envelope(const Json& doc, const std::string& format);

Json read_json_file(const std::filesystem::path& path);
/// Two-space indented, trailing newline; identical values give identical bytes.
void write_json_file(const std::filesystem::path& path, const Json& doc);
std::string dump(const Json& doc);

}  // namespace brickasm
