#pragma once

#include "cpsconf/degree.hpp"
#include "cpsconf/falsify.hpp"
#include "cpsconf/systems.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace cpsconf::cli {

using nlohmann::json;

/// Config error carrying the offending JSON-pointer-style paths.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::vector<std::string>& problems);
};

struct SystemSpec {
  SystemUnderTest system;
  std::string description;
};

/// Shared config body for falsify/degree/bench runs.
struct RunConfig {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t budget = 100;
  double horizon = 0.0;
  int max_jumps = 0;
  SearchSpace space;
  OptimizerConfig optimizer;
  json raw;
};

SystemUnderTest parse_system(const json& spec, const std::string& path,
                             const std::filesystem::path& base_dir,
                             std::vector<std::string>& problems);

Objective parse_objective(const json& spec, const std::string& path, double horizon,
                          std::vector<std::string>& problems);

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir,
                           std::vector<std::string>& problems);

json load_json_file(const std::filesystem::path& path);

/// Canonical dump (sorted keys, stable number formatting) used for hashing
/// and for every report file, so reruns are byte-identical.
std::string canonical(const json& doc);

void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Writes manifest.json (config hash, seed, version) into the output
/// directory.
void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const json& config, std::uint64_t seed);

json theta_to_json(const Theta& theta);

} // namespace cpsconf::cli
