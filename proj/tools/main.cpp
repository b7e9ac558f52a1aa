// caproute command-line frontend. Parses flags, assembles the options JSON
// and drives everything through the C API in caproute.h.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "caproute.h"

using nlohmann::json;

namespace {

constexpr const char* kCommands[] = {"synth",    "ingest", "refine",   "core",
                                     "aptitude", "train",  "route",    "bench",
                                     "coverage", "simulate-release",   "report"};

constexpr const char* kDescriptions[] = {
    "Generate a synthetic world (instructions, evals, ground truth)",
    "Validate instruction/eval files and build the correctness matrix",
    "Apply the circle test to hard multiple-choice instructions",
    "Sample the high-distinguishability core task set",
    "Run aptitude tests and build the model zoo",
    "Train the routing scorer (connector-only stage, then full)",
    "Route the test split to the best model per instruction",
    "Score an assignment against ground truth with baselines",
    "Coverage analysis of a model union against a reference model",
    "Stream newcomers through the zoo with a frozen scorer",
    "Re-render a report artifact as json or markdown"};

struct GlobalFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir = ".";
  int workers = 1;
  std::string format = "json";
  long long seed = -1;
  bool seed_given = false;
};

void add_common_flags(CLI::App* cmd, GlobalFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Path to a key=value config file");
  cmd->add_option("--set", flags.sets, "Override one config key, e.g. --set synth.num_models=8")
      ->type_name("KEY=VALUE");
  cmd->add_option("--out-dir", flags.out_dir, "Directory for inputs/outputs (default '.')");
  cmd->add_option("--workers", flags.workers, "Worker threads for routing");
  cmd->add_option("--format", flags.format, "Report format: json or markdown")
      ->check(CLI::IsMember({"json", "markdown"}));
  cmd->add_option("--seed", flags.seed, "Global seed override")
      ->each([&flags](const std::string&) { flags.seed_given = true; });
}

int fail(caproute_status status) {
  std::fprintf(stderr, "error: %s\n", caproute_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"caproute: instruction-level model routing from aptitude-test capability profiles"};
  app.require_subcommand(1);

  GlobalFlags flags;
  std::string chosen;
  for (std::size_t i = 0; i < std::size(kCommands); ++i) {
    CLI::App* cmd = app.add_subcommand(kCommands[i], kDescriptions[i]);
    add_common_flags(cmd, flags);
    cmd->callback([&chosen, name = std::string(kCommands[i])]() { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  // Flat config: file first, then --set overrides, then --seed.
  json options;
  if (!flags.config_path.empty()) {
    std::FILE* f = std::fopen(flags.config_path.c_str(), "rb");
    if (!f) {
      std::fprintf(stderr, "error: cannot open config file: %s\n", flags.config_path.c_str());
      return 1;
    }
    std::string text;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, n);
    std::fclose(f);
    options["config_text"] = text;  // parsed library-side, one parser for both
  }
  json overrides = json::object();
  for (const auto& kv : flags.sets) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "error: --set expects KEY=VALUE, got '%s'\n", kv.c_str());
      return 1;
    }
    overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (flags.seed_given) overrides["seed"] = flags.seed;

  options["out_dir"] = flags.out_dir;
  options["workers"] = flags.workers;
  options["format"] = flags.format;
  options["overrides"] = overrides;

  caproute_status status = caproute_run(chosen.c_str(), options.dump().c_str());
  if (status != CAPROUTE_OK) return fail(status);
  return 0;
}
