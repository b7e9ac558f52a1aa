#include "caproute.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include <json.hpp>

#include "caproute/errors.hpp"
#include "caproute/pipeline.hpp"
#include "caproute/router.hpp"
#include "caproute/scorer.hpp"
#include "caproute/zoo.hpp"

using nlohmann::json;

namespace {

thread_local std::string g_last_error;

caproute_status capture(const std::exception_ptr& eptr) {
  try {
    std::rethrow_exception(eptr);
  } catch (const caproute::UsageError& e) {
    g_last_error = e.what();
    return CAPROUTE_ERR_USAGE;
  } catch (const caproute::DataError& e) {
    g_last_error = e.what();
    return CAPROUTE_ERR_DATA;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CAPROUTE_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CAPROUTE_ERR_INTERNAL;
  }
}

json parse_options(const char* options_json) {
  if (!options_json || !*options_json) return json::object();
  json j = json::parse(options_json, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw caproute::UsageError("options must be a JSON object");
  return j;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct caproute_engine {
  caproute::ScorerParams params;
  caproute::Zoo zoo;
};

extern "C" {

const char* caproute_version(void) { return "0.1.0"; }

const char* caproute_last_error(void) { return g_last_error.c_str(); }

caproute_status caproute_run(const char* command, const char* options_json) {
  try {
    if (!command || !*command) throw caproute::UsageError("missing command");
    json j = parse_options(options_json);
    caproute::CommandOptions opts;
    if (j.contains("config")) {
      if (!j.at("config").is_object())
        throw caproute::UsageError("options 'config' must be an object");
      opts.config = j.at("config");
    }
    if (j.contains("config_text")) {
      json parsed = caproute::parse_config_text(j.at("config_text").get<std::string>(), "<config>");
      for (const auto& [key, value] : parsed.items()) opts.config[key] = value;
    }
    if (j.contains("overrides")) {
      if (!j.at("overrides").is_object())
        throw caproute::UsageError("options 'overrides' must be an object");
      for (const auto& [key, value] : j.at("overrides").items())
        opts.config[key] = value.is_string()
                               ? caproute::parse_config_value_text(value.get<std::string>())
                               : value;
    }
    opts.out_dir = j.value("out_dir", std::string("."));
    opts.workers = j.value("workers", 1);
    opts.format = j.value("format", std::string("json"));
    caproute::run_command(command, opts);
    g_last_error.clear();
    return CAPROUTE_OK;
  } catch (...) {
    return capture(std::current_exception());
  }
}

caproute_status caproute_engine_open(const char* scorer_path, const char* zoo_path,
                                     caproute_engine** out_engine) {
  if (out_engine) *out_engine = nullptr;
  try {
    if (!scorer_path || !zoo_path || !out_engine)
      throw caproute::UsageError("engine_open requires scorer_path, zoo_path and out_engine");
    auto engine = std::make_unique<caproute_engine>();
    engine->params = caproute::load_scorer(scorer_path);
    engine->zoo = caproute::read_zoo_json(zoo_path);
    if (engine->zoo.members.empty()) throw caproute::DataError("zoo has no members");
    *out_engine = engine.release();
    g_last_error.clear();
    return CAPROUTE_OK;
  } catch (...) {
    return capture(std::current_exception());
  }
}

void caproute_engine_close(caproute_engine* engine) { delete engine; }

caproute_status caproute_engine_route(caproute_engine* engine, const char* instruction_text,
                                      const char* options_json, char** out_decision_json) {
  if (out_decision_json) *out_decision_json = nullptr;
  try {
    if (!engine || !instruction_text || !out_decision_json)
      throw caproute::UsageError("engine_route requires engine, instruction_text and out pointer");
    json j = parse_options(options_json);
    caproute::RouteOptions ro;
    ro.num_perturbations = j.value("num_perturbations", ro.num_perturbations);
    ro.seed = j.value("seed", static_cast<uint64_t>(0));
    ro.inquiry_prompt = j.value("inquiry_prompt", ro.inquiry_prompt);

    caproute::Instruction ins;
    ins.id = j.value("instruction_id", std::string("adhoc"));
    ins.text = instruction_text;
    caproute::RoutingDecision d = caproute::route_one(engine->params, engine->zoo, ins, ro);

    json out;
    out["instruction_id"] = d.instruction_id;
    out["chosen_model"] = d.chosen_model;
    out["scores"] = d.scores;
    out["perturbation_seeds"] = d.perturbation_seeds;
    *out_decision_json = dup_string(out.dump());
    if (!*out_decision_json) throw std::bad_alloc();
    g_last_error.clear();
    return CAPROUTE_OK;
  } catch (...) {
    return capture(std::current_exception());
  }
}

void caproute_string_free(char* s) { std::free(s); }

}  // extern "C"
