#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace caproute {

/// Flat key=value configuration ("synth.num_models = 8"). Values parse to
/// bool, integer, double or (optionally quoted) string. '#' starts a comment.
nlohmann::json parse_config_file(const std::string& path);
nlohmann::json parse_config_text(const std::string& text, const std::string& origin);
/// One value with the same typing rules as the file parser.
nlohmann::json parse_config_value_text(const std::string& raw);

/// Stable digest of the canonical (sorted-key) config serialization.
std::string config_digest(const nlohmann::json& config);

/// Typed config lookups; UsageError on a present-but-wrong-typed value.
int64_t cfg_int(const nlohmann::json& cfg, const std::string& key, int64_t fallback);
double cfg_double(const nlohmann::json& cfg, const std::string& key, double fallback);
bool cfg_bool(const nlohmann::json& cfg, const std::string& key, bool fallback);
std::string cfg_str(const nlohmann::json& cfg, const std::string& key, const std::string& fallback);

/// Options accepted by every pipeline command. `config` holds the flat keys;
/// out_dir/workers/format mirror the CLI flags.
struct CommandOptions {
  nlohmann::json config = nlohmann::json::object();
  std::string out_dir = ".";
  int workers = 1;
  std::string format = "json";  // or "markdown"
};

/// Dispatch a pipeline subcommand: synth, ingest, refine, core, aptitude,
/// train, route, bench, coverage, simulate-release, report. Each command
/// reads and writes well-known files under out_dir and drops a
/// `<command>_manifest.json` next to its outputs. UsageError for an unknown
/// command.
void run_command(const std::string& command, const CommandOptions& opts);

bool is_known_command(const std::string& command);

}  // namespace caproute
