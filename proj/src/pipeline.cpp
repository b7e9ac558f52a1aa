#include "caproute/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <set>
#include <sstream>

#include "caproute/bench.hpp"
#include "caproute/errors.hpp"
#include "caproute/matrix.hpp"
#include "caproute/rng.hpp"
#include "caproute/router.hpp"
#include "caproute/sampling.hpp"
#include "caproute/scorer.hpp"
#include "caproute/store.hpp"
#include "caproute/synth.hpp"
#include "caproute/zoo.hpp"
#include "file_util.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace caproute {

namespace {

std::string trim(const std::string& s) {
  std::size_t lo = s.find_first_not_of(" \t");
  if (lo == std::string::npos) return "";
  std::size_t hi = s.find_last_not_of(" \t");
  return s.substr(lo, hi - lo + 1);
}

}  // namespace

json parse_config_value_text(const std::string& raw) {
  if (raw.size() >= 2 &&
      ((raw.front() == '"' && raw.back() == '"') || (raw.front() == '\'' && raw.back() == '\'')))
    return raw.substr(1, raw.size() - 2);
  if (raw == "true") return true;
  if (raw == "false") return false;
  try {
    std::size_t used = 0;
    long long i = std::stoll(raw, &used);
    if (used == raw.size()) return i;
  } catch (...) {
  }
  try {
    std::size_t used = 0;
    double d = std::stod(raw, &used);
    if (used == raw.size()) return d;
  } catch (...) {
  }
  return raw;
}

json parse_config_text(const std::string& text, const std::string& origin) {
  json cfg = json::object();
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    // strip a trailing comment on unquoted values
    if (!value.empty() && value.front() != '"' && value.front() != '\'') {
      std::size_t hash = value.find('#');
      if (hash != std::string::npos) value = trim(value.substr(0, hash));
    }
    if (key.empty()) throw UsageError(origin + ":" + std::to_string(lineno) + ": empty key");
    cfg[key] = parse_config_value_text(value);
  }
  return cfg;
}

json parse_config_file(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return parse_config_text(text, path);
}

std::string config_digest(const json& config) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

int64_t cfg_int(const json& cfg, const std::string& key, int64_t fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg.at(key);
  if (!v.is_number_integer()) throw UsageError("config key '" + key + "' must be an integer");
  return v.get<int64_t>();
}

double cfg_double(const json& cfg, const std::string& key, double fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg.at(key);
  if (!v.is_number()) throw UsageError("config key '" + key + "' must be a number");
  return v.get<double>();
}

bool cfg_bool(const json& cfg, const std::string& key, bool fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg.at(key);
  if (!v.is_boolean()) throw UsageError("config key '" + key + "' must be true or false");
  return v.get<bool>();
}

std::string cfg_str(const json& cfg, const std::string& key, const std::string& fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg.at(key);
  if (!v.is_string()) throw UsageError("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

namespace {

/// Per-command seed: "<cmd>.seed", falling back to the global "seed" key.
uint64_t cfg_seed(const json& cfg, const std::string& key, uint64_t fallback) {
  if (cfg.contains(key)) return static_cast<uint64_t>(cfg_int(cfg, key, 0));
  if (cfg.contains("seed")) return static_cast<uint64_t>(cfg_int(cfg, "seed", 0));
  return fallback;
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct ManifestInfo {
  std::vector<uint64_t> seeds;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

void write_manifest(const std::string& command, const CommandOptions& opts,
                    const ManifestInfo& info) {
  json j;
  j["command"] = command;
  j["config_digest"] = config_digest(opts.config);
  j["seeds"] = info.seeds;
  j["input_paths"] = info.inputs;
  j["output_paths"] = info.outputs;
  j["timestamp"] = iso_timestamp();
  std::string name = command;
  std::replace(name.begin(), name.end(), '-', '_');
  write_file(opts.out_dir + "/" + name + "_manifest.json", j.dump(2) + "\n");
}

std::string out_path(const CommandOptions& opts, const std::string& name) {
  return opts.out_dir + "/" + name;
}

/// Path-valued config key with an out_dir-relative default.
std::string cfg_path(const CommandOptions& opts, const std::string& key,
                     const std::string& default_name) {
  std::string p = cfg_str(opts.config, key, "");
  if (p.empty()) return out_path(opts, default_name);
  return p;
}

WorldConfig world_config_from(const json& cfg) {
  WorldConfig wc;
  wc.num_models = static_cast<int>(cfg_int(cfg, "synth.num_models", wc.num_models));
  wc.num_categories = static_cast<int>(cfg_int(cfg, "synth.num_categories", wc.num_categories));
  wc.subtopics_per_category =
      static_cast<int>(cfg_int(cfg, "synth.subtopics_per_category", wc.subtopics_per_category));
  wc.num_train = static_cast<int>(cfg_int(cfg, "synth.num_train", wc.num_train));
  wc.num_test = static_cast<int>(cfg_int(cfg, "synth.num_test", wc.num_test));
  wc.mc_fraction = cfg_double(cfg, "synth.mc_fraction", wc.mc_fraction);
  wc.num_options = static_cast<int>(cfg_int(cfg, "synth.num_options", wc.num_options));
  wc.skill_sharpness = cfg_double(cfg, "synth.skill_sharpness", wc.skill_sharpness);
  wc.difficulty_spread = cfg_double(cfg, "synth.difficulty_spread", wc.difficulty_spread);
  wc.perfect_skills = cfg_bool(cfg, "synth.perfect_skills", wc.perfect_skills);
  wc.dominant_model = static_cast<int>(cfg_int(cfg, "synth.dominant_model", wc.dominant_model));
  wc.seed = cfg_seed(cfg, "synth.seed", wc.seed);
  return wc;
}

ScorerDims dims_from(const json& cfg) {
  ScorerDims dims;
  dims.d_capability = static_cast<int>(cfg_int(cfg, "train.dim_capability", dims.d_capability));
  dims.d_instruction = static_cast<int>(cfg_int(cfg, "train.dim_instruction", dims.d_instruction));
  dims.d_joint = static_cast<int>(cfg_int(cfg, "train.dim_joint", dims.d_joint));
  dims.hidden_units = static_cast<int>(cfg_int(cfg, "train.hidden_units", dims.hidden_units));
  return dims;
}

RouteOptions route_options_from(const CommandOptions& opts) {
  RouteOptions ro;
  ro.inquiry_prompt = cfg_str(opts.config, "route.inquiry_prompt", ro.inquiry_prompt);
  ro.num_perturbations =
      static_cast<int>(cfg_int(opts.config, "route.num_perturbations", ro.num_perturbations));
  ro.seed = cfg_seed(opts.config, "route.seed", 0);
  ro.workers = opts.workers;
  return ro;
}

void run_synth(const CommandOptions& opts) {
  WorldConfig wc = world_config_from(opts.config);
  World world = generate_world(wc);
  write_world(world, opts.out_dir);
  std::printf("synth: %zu instructions, %d models, %d categories -> %s\n", world.store.size(),
              wc.num_models, wc.num_categories, opts.out_dir.c_str());
  write_manifest("synth", opts,
                 {{wc.seed},
                  {},
                  {out_path(opts, "instructions.jsonl"), out_path(opts, "evals.jsonl"),
                   out_path(opts, "truth.json")}});
}

void run_ingest(const CommandOptions& opts) {
  std::string ins_path = cfg_path(opts, "ingest.instructions", "instructions.jsonl");
  std::string evals_path = cfg_path(opts, "ingest.evals", "evals.jsonl");
  InstructionStore store = read_instructions_jsonl(ins_path);
  EvalSet evals = read_evals_jsonl(evals_path, store);
  CorrectnessMatrix matrix = build_correctness_matrix(evals);
  std::string out = out_path(opts, "matrix.json");
  write_matrix_json(matrix, out);
  std::printf("ingest: %zu instructions, %zu models, matrix %zux%zu -> %s\n", store.size(),
              matrix.num_models(), matrix.num_models(), matrix.num_instructions(), out.c_str());
  write_manifest("ingest", opts, {{}, {ins_path, evals_path}, {out}});
}

void run_refine(const CommandOptions& opts) {
  std::string ins_path = cfg_path(opts, "ingest.instructions", "instructions.jsonl");
  std::string evals_path = cfg_path(opts, "ingest.evals", "evals.jsonl");
  std::string matrix_path = cfg_path(opts, "refine.matrix", "matrix.json");
  double threshold = cfg_double(opts.config, "refine.hardness_threshold", 0.25);
  InstructionStore store = read_instructions_jsonl(ins_path);
  EvalSet evals = read_evals_jsonl(evals_path, store);
  CorrectnessMatrix matrix = read_matrix_json(matrix_path);
  CorrectnessMatrix refined = circle_test_refine(matrix, evals, store, threshold);
  std::size_t flipped = 0;
  for (std::size_t m = 0; m < matrix.num_models(); ++m)
    for (std::size_t i = 0; i < matrix.num_instructions(); ++i)
      if (matrix.cell(m, i) && !refined.cell(m, i)) ++flipped;
  std::string out = out_path(opts, "matrix_refined.json");
  write_matrix_json(refined, out);
  std::printf("refine: circle test at threshold %.2f flipped %zu cells -> %s\n", threshold,
              flipped, out.c_str());
  write_manifest("refine", opts, {{}, {ins_path, evals_path, matrix_path}, {out}});
}

void run_core(const CommandOptions& opts) {
  std::string ins_path = cfg_path(opts, "ingest.instructions", "instructions.jsonl");
  std::string matrix_path = cfg_path(opts, "core.matrix", "matrix_refined.json");
  int num_tasks = static_cast<int>(cfg_int(opts.config, "core.num_tasks", 50));
  int shots = static_cast<int>(cfg_int(opts.config, "core.shots", 20));
  uint64_t seed = cfg_seed(opts.config, "core.seed", 0);
  InstructionStore store = read_instructions_jsonl(ins_path);
  CorrectnessMatrix matrix = read_matrix_json(matrix_path);
  CoreTaskSet core = sample_core_tasks(store, matrix, num_tasks, shots, seed);
  std::string out = out_path(opts, "core_tasks.json");
  write_core_tasks_json(core, out);
  std::printf("core: sampled %d tasks x %d shots -> %s\n", num_tasks, shots, out.c_str());
  write_manifest("core", opts, {{seed}, {ins_path, matrix_path}, {out}});
}

void run_aptitude(const CommandOptions& opts) {
  std::string ins_path = cfg_path(opts, "ingest.instructions", "instructions.jsonl");
  std::string evals_path = cfg_path(opts, "ingest.evals", "evals.jsonl");
  std::string core_path = cfg_path(opts, "aptitude.core", "core_tasks.json");
  InstructionStore store = read_instructions_jsonl(ins_path);
  EvalSet evals = read_evals_jsonl(evals_path, store);
  CoreTaskSet core = read_core_tasks_json(core_path);

  Zoo zoo;
  for (const auto& model_id : evals.model_ids()) {
    ModelRecord rec;
    rec.model_id = model_id;
    zoo.members.push_back(rec);
    zoo.representations[model_id] = run_aptitude_test(model_id, evals, core);
  }
  std::string out = out_path(opts, "zoo.json");
  write_zoo_json(zoo, out);
  std::printf("aptitude: %zu models profiled over %zu tasks -> %s\n", zoo.members.size(),
              core.tasks.size(), out.c_str());
  write_manifest("aptitude", opts, {{}, {ins_path, evals_path, core_path}, {out}});
}

void run_train(const CommandOptions& opts) {
  const json& cfg = opts.config;
  std::string ins_path = cfg_path(opts, "ingest.instructions", "instructions.jsonl");
  std::string matrix_path = cfg_path(opts, "train.matrix", "matrix_refined.json");
  std::string core_path = cfg_path(opts, "aptitude.core", "core_tasks.json");
  std::string zoo_path = cfg_path(opts, "train.zoo", "zoo.json");
  InstructionStore store = read_instructions_jsonl(ins_path);
  CorrectnessMatrix matrix = read_matrix_json(matrix_path);
  CoreTaskSet core = read_core_tasks_json(core_path);
  Zoo zoo = read_zoo_json(zoo_path);

  TrainConfig tc;
  tc.k = static_cast<int>(cfg_int(cfg, "train.k", 8));
  tc.lr_base = cfg_double(cfg, "train.lr_base", 0.05);
  tc.lr_connector_multiplier = cfg_double(cfg, "train.lr_connector_multiplier", 5.0);
  tc.batches_per_model = static_cast<int>(cfg_int(cfg, "train.batches_per_model", 300));
  tc.seed = cfg_seed(cfg, "train.seed", 0);
  tc.dims = dims_from(cfg);

  std::string weighting = cfg_str(cfg, "train.rank_weighting", "accuracy");
  if (weighting == "accuracy") {
    // Stronger candidates sampled with increased weight; measured on the
    // train split only.
    std::vector<std::string> train_ids;
    for (const Instruction* ins : store.by_split(Split::train))
      if (matrix.has_instruction(ins->id)) train_ids.push_back(ins->id);
    CorrectnessMatrix train_matrix = matrix.restrict_instructions(train_ids);
    tc.model_rank_weights.resize(matrix.num_models());
    for (std::size_t m = 0; m < matrix.num_models(); ++m)
      tc.model_rank_weights[m] =
          train_matrix.model_accuracy(train_matrix.model_index(matrix.model_ids()[m]));
  } else if (weighting != "uniform") {
    throw UsageError("train.rank_weighting must be 'accuracy' or 'uniform'");
  }

  TrainConfig stage1 = tc;
  stage1.stage = TrainStage::connector_only;
  stage1.epochs = static_cast<int>(cfg_int(cfg, "train.connector_epochs", 5));
  TrainResult r1 = train(matrix, store, core, zoo, stage1);

  TrainConfig stage2 = tc;
  stage2.stage = TrainStage::full;
  stage2.epochs = static_cast<int>(cfg_int(cfg, "train.full_epochs", 15));
  stage2.seed = Rng::derive(tc.seed, "stage2");
  TrainResult r2 = train(matrix, store, core, zoo, stage2, &r1.params);

  std::string scorer_out = out_path(opts, "scorer.bin");
  save_scorer(r2.params, scorer_out);
  json losses;
  losses["connector_stage"] = r1.epoch_mean_loss;
  losses["full_stage"] = r2.epoch_mean_loss;
  losses["skipped_models"] = r1.skipped_models;
  std::string loss_out = out_path(opts, "train_loss.json");
  write_file(loss_out, losses.dump(2) + "\n");

  double final_loss = r2.epoch_mean_loss.empty()
                          ? (r1.epoch_mean_loss.empty() ? 0.0 : r1.epoch_mean_loss.back())
                          : r2.epoch_mean_loss.back();
  std::printf("train: %d+%d epochs, k=%d, final mean loss %.4f -> %s\n", stage1.epochs,
              stage2.epochs, tc.k, final_loss, scorer_out.c_str());
  write_manifest("train", opts,
                 {{tc.seed}, {ins_path, matrix_path, core_path, zoo_path}, {scorer_out, loss_out}});
}

void run_route(const CommandOptions& opts) {
  std::string ins_path = cfg_path(opts, "ingest.instructions", "instructions.jsonl");
  std::string scorer_path = cfg_path(opts, "route.scorer", "scorer.bin");
  std::string zoo_path = cfg_path(opts, "route.zoo", "zoo.json");
  InstructionStore store = read_instructions_jsonl(ins_path);
  ScorerParams params = load_scorer(scorer_path);
  Zoo zoo = read_zoo_json(zoo_path);
  RouteOptions ro = route_options_from(opts);

  std::vector<Instruction> test_instructions;
  for (const Instruction* ins : store.by_split(Split::test)) test_instructions.push_back(*ins);
  RoutingAssignment assignment = route_all(params, zoo, test_instructions, ro);
  std::string out = out_path(opts, "assignment.jsonl");
  write_assignment_jsonl(assignment, out);
  std::printf("route: %zu test instructions over %zu models -> %s\n",
              assignment.decisions.size(), zoo.members.size(), out.c_str());
  write_manifest("route", opts, {{ro.seed}, {ins_path, scorer_path, zoo_path}, {out}});
}

void run_bench(const CommandOptions& opts) {
  std::string ins_path = cfg_path(opts, "ingest.instructions", "instructions.jsonl");
  std::string matrix_path = cfg_path(opts, "bench.matrix", "matrix_refined.json");
  std::string assignment_path = cfg_path(opts, "bench.assignment", "assignment.jsonl");
  InstructionStore store = read_instructions_jsonl(ins_path);
  CorrectnessMatrix matrix = read_matrix_json(matrix_path);
  RoutingAssignment assignment = read_assignment_jsonl(assignment_path);
  if (assignment.decisions.empty()) throw DataError("bench: empty assignment");

  // Evaluate against the zoo that was actually routed over.
  std::set<std::string> model_set;
  std::vector<std::string> instruction_ids;
  for (const auto& d : assignment.decisions) {
    model_set.insert(d.chosen_model);
    for (const auto& [id, s] : d.scores) model_set.insert(id);
    instruction_ids.push_back(d.instruction_id);
  }
  CorrectnessMatrix restricted =
      matrix.restrict({model_set.begin(), model_set.end()}, instruction_ids);
  BenchReport report = evaluate_assignment(assignment, restricted, store);

  std::string out = out_path(opts, "bench_report.json");
  write_bench_report_json(report, out);
  ManifestInfo info{{}, {ins_path, matrix_path, assignment_path}, {out}};
  if (opts.format == "markdown") {
    std::string md_out = out_path(opts, "bench_report.md");
    write_file(md_out, render_bench_markdown(report));
    info.outputs.push_back(md_out);
  }
  std::printf("bench: routed %.2f | random %.2f | best single %.2f (%s) | oracle %.2f -> %s\n",
              report.mean, report.random_baseline, report.best_single,
              report.best_single_model.c_str(), report.oracle, out.c_str());
  write_manifest("bench", opts, info);
}

void run_coverage(const CommandOptions& opts) {
  std::string matrix_path = cfg_path(opts, "coverage.matrix", "matrix_refined.json");
  std::string reference = cfg_str(opts.config, "coverage.reference", "");
  if (reference.empty()) throw UsageError("coverage requires coverage.reference=<model_id>");
  CorrectnessMatrix matrix = read_matrix_json(matrix_path);

  std::vector<std::string> union_models;
  std::string union_spec = cfg_str(opts.config, "coverage.union", "");
  if (union_spec.empty()) {
    for (const auto& id : matrix.model_ids())
      if (id != reference) union_models.push_back(id);
  } else {
    std::istringstream ss(union_spec);
    std::string id;
    while (std::getline(ss, id, ',')) {
      id = trim(id);
      if (!id.empty()) union_models.push_back(id);
    }
  }
  CoverageReport report = coverage_analysis(matrix, reference, union_models);
  std::string out = out_path(opts, "coverage_report.json");
  write_coverage_report_json(report, out);
  ManifestInfo info{{}, {matrix_path}, {out}};
  if (opts.format == "markdown") {
    std::string md_out = out_path(opts, "coverage_report.md");
    write_file(md_out, render_coverage_markdown(report));
    info.outputs.push_back(md_out);
  }
  std::printf("coverage: ref %s covered_correct %.4f covered_incorrect %.4f gain %+.4f -> %s\n",
              reference.c_str(), report.covered_correct_fraction,
              report.covered_incorrect_fraction, report.potential_gain, out.c_str());
  write_manifest("coverage", opts, info);
}

void run_simulate_release(const CommandOptions& opts) {
  std::string world_dir = cfg_str(opts.config, "sim.world_dir", opts.out_dir);
  std::string ins_path = world_dir + "/instructions.jsonl";
  std::string evals_path = world_dir + "/evals.jsonl";
  std::string scorer_path = cfg_path(opts, "sim.scorer", "scorer.bin");
  std::string core_path = cfg_path(opts, "sim.core", "core_tasks.json");

  InstructionStore store = read_instructions_jsonl(ins_path);
  EvalSet evals = read_evals_jsonl(evals_path, store);
  CorrectnessMatrix matrix = build_correctness_matrix(evals);
  CoreTaskSet core = read_core_tasks_json(core_path);
  ScorerParams params = load_scorer(scorer_path);
  RouteOptions ro = route_options_from(opts);

  std::vector<ModelRecord> release_order;
  for (const auto& id : matrix.model_ids()) {
    ModelRecord rec;
    rec.model_id = id;
    release_order.push_back(rec);
  }
  std::vector<Instruction> test_instructions;
  for (const Instruction* ins : store.by_split(Split::test)) test_instructions.push_back(*ins);

  auto events = simulate_release(release_order, evals, matrix, core, params, test_instructions, ro);
  std::string out = out_path(opts, "release_timeline.jsonl");
  write_timeline_jsonl(events, out);

  int routed_ge_random = 0;
  for (const auto& ev : events)
    if (ev.routed_accuracy >= ev.random_accuracy) ++routed_ge_random;
  std::printf("simulate-release: %zu steps, routed >= random at %d/%zu -> %s\n", events.size(),
              routed_ge_random, events.size(), out.c_str());
  write_manifest("simulate-release", opts,
                 {{ro.seed}, {ins_path, evals_path, scorer_path, core_path}, {out}});
}

void run_report(const CommandOptions& opts) {
  std::string input = cfg_str(opts.config, "report.input", "");
  if (input.empty()) throw UsageError("report requires report.input=<path>");

  std::string stem = fs::path(input).stem().string();
  std::string rendered;
  json as_json;
  if (input.size() > 6 && input.substr(input.size() - 6) == ".jsonl") {
    auto events = read_timeline_jsonl(input);
    if (opts.format == "markdown") {
      rendered = render_timeline_markdown(events);
    } else {
      json arr = json::array();
      for (const auto& ev : events)
        arr.push_back(json{{"step", ev.step},
                           {"model_id", ev.model_id},
                           {"zoo_after", ev.zoo_after},
                           {"routed_accuracy", ev.routed_accuracy},
                           {"oracle_accuracy", ev.oracle_accuracy},
                           {"random_accuracy", ev.random_accuracy}});
      rendered = arr.dump(2) + "\n";
    }
  } else {
    json j;
    try {
      j = json::parse(read_file(input));
    } catch (const json::exception& e) {
      throw DataError(input + ": malformed report json: " + e.what());
    }
    if (j.contains("per_dataset_accuracy")) {
      BenchReport r = bench_report_from_json_file(input);
      rendered = opts.format == "markdown" ? render_bench_markdown(r) : j.dump(2) + "\n";
    } else if (j.contains("covered_correct_fraction")) {
      CoverageReport r = coverage_report_from_json_file(input);
      rendered = opts.format == "markdown" ? render_coverage_markdown(r) : j.dump(2) + "\n";
    } else {
      throw DataError(input + ": unrecognized report shape");
    }
  }
  std::string ext = opts.format == "markdown" ? ".md" : ".json";
  std::string out = out_path(opts, stem + "_rendered" + ext);
  write_file(out, rendered);
  std::printf("report: %s -> %s\n", input.c_str(), out.c_str());
  write_manifest("report", opts, {{}, {input}, {out}});
}

}  // namespace

bool is_known_command(const std::string& command) {
  static const std::set<std::string> kCommands = {
      "synth", "ingest", "refine",   "core",           "aptitude", "train",
      "route", "bench",  "coverage", "simulate-release", "report"};
  return kCommands.count(command) > 0;
}

void run_command(const std::string& command, const CommandOptions& opts) {
  if (!is_known_command(command)) throw UsageError("unknown command: '" + command + "'");
  if (opts.format != "json" && opts.format != "markdown")
    throw UsageError("format must be 'json' or 'markdown'");
  if (opts.workers < 1) throw UsageError("workers must be >= 1");
  std::error_code ec;
  fs::create_directories(opts.out_dir, ec);
  if (ec) throw DataError("cannot create out dir: " + opts.out_dir);

  if (command == "synth") run_synth(opts);
  else if (command == "ingest") run_ingest(opts);
  else if (command == "refine") run_refine(opts);
  else if (command == "core") run_core(opts);
  else if (command == "aptitude") run_aptitude(opts);
  else if (command == "train") run_train(opts);
  else if (command == "route") run_route(opts);
  else if (command == "bench") run_bench(opts);
  else if (command == "coverage") run_coverage(opts);
  else if (command == "simulate-release") run_simulate_release(opts);
  else run_report(opts);
}

}  // namespace caproute
