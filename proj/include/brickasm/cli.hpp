#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace brickasm {

inline constexpr const char* kConfigEnv = "BRICKASM_CONFIG";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Runs one command line (argv[0] is the program name).
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace brickasm
