#include "caproute/router.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "caproute/errors.hpp"
#include "caproute/rng.hpp"
#include "file_util.hpp"

using nlohmann::json;

namespace caproute {

namespace {

/// Per-call scoring state: the identity-rendering capability projection is
/// cached per member; perturbed renderings are rendered, encoded and
/// projected per decision since their permutations depend on the decision
/// seed. All paths go through the same forward helpers as score().
struct MemberEntry {
  std::string model_id;
  const CapabilityRepresentation* rep;
  std::vector<double> identity_proj;
};

std::vector<MemberEntry> prepare_members(const ScorerParams& params, const Zoo& zoo) {
  if (zoo.members.empty()) throw DataError("routing requires a non-empty zoo");
  std::map<std::string, const CapabilityRepresentation*> unique;  // dedupes, sorts
  for (const auto& m : zoo.members) {
    auto it = zoo.representations.find(m.model_id);
    if (it == zoo.representations.end())
      throw DataError("zoo member '" + m.model_id + "' has no capability representation");
    unique[m.model_id] = &it->second;
  }
  std::vector<MemberEntry> members;
  members.reserve(unique.size());
  for (const auto& [id, rep] : unique) {
    MemberEntry e;
    e.model_id = id;
    e.rep = rep;
    e.identity_proj = project_capability(
        params, encode_capability(render_capability_text(*rep), params.dims.d_capability));
    members.push_back(std::move(e));
  }
  return members;
}

std::vector<int> random_permutation(std::size_t n, uint64_t seed) {
  std::vector<int> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
  Rng rng(seed);
  rng.shuffle(perm);
  return perm;
}

RoutingDecision decide(const ScorerParams& params, const std::vector<MemberEntry>& members,
                       const Instruction& instruction, const RouteOptions& opts, uint64_t seed) {
  if (opts.inquiry_prompt.empty()) throw DataError("routing: empty inquiry prompt");
  if (opts.num_perturbations < 0) throw DataError("routing: num_perturbations must be >= 0");

  std::vector<uint64_t> perturbation_seeds;
  for (int j = 1; j <= opts.num_perturbations; ++j)
    perturbation_seeds.push_back(Rng::derive(seed, static_cast<uint64_t>(j)));

  std::vector<double> v = project_instruction(
      params, encode_instruction(instruction.text, params.dims.d_instruction));

  RoutingDecision decision;
  decision.instruction_id = instruction.id;
  decision.perturbation_seeds = perturbation_seeds;
  for (const auto& member : members) {
    double sum = logistic(logit_from_projected(params, member.identity_proj, v));
    for (uint64_t pseed : perturbation_seeds) {
      auto perm = random_permutation(member.rep->results.size(), pseed);
      FeatureVector ec = encode_capability(render_capability_text(*member.rep, &perm),
                                           params.dims.d_capability);
      sum += logistic(logit_from_projected(params, project_capability(params, ec), v));
    }
    decision.scores[member.model_id] = sum / static_cast<double>(1 + opts.num_perturbations);
  }

  // argmax; the map is id-sorted, so strict '>' keeps the lexicographically
  // smallest id among ties.
  double best = -1.0;
  for (const auto& [id, s] : decision.scores) {
    if (s > best) {
      best = s;
      decision.chosen_model = id;
    }
  }
  return decision;
}

}  // namespace

RoutingDecision route_one(const ScorerParams& params, const Zoo& zoo,
                          const Instruction& instruction, const RouteOptions& opts) {
  auto members = prepare_members(params, zoo);
  return decide(params, members, instruction, opts, opts.seed);
}

RoutingAssignment route_all(const ScorerParams& params, const Zoo& zoo,
                            const std::vector<Instruction>& instructions,
                            const RouteOptions& opts) {
  if (opts.inquiry_prompt.empty()) throw DataError("routing: empty inquiry prompt");
  if (opts.num_perturbations < 0) throw DataError("routing: num_perturbations must be >= 0");
  auto members = prepare_members(params, zoo);
  RoutingAssignment assignment;
  assignment.decisions.resize(instructions.size());

  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&](std::size_t begin, std::size_t stride) {
    try {
      for (std::size_t i = begin; i < instructions.size(); i += stride) {
        uint64_t seed = opts.seed ^ fnv1a64(instructions[i].id);
        assignment.decisions[i] = decide(params, members, instructions[i], opts, seed);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  int workers = std::max(1, opts.workers);
  if (workers == 1 || instructions.size() < 2) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t)
      pool.emplace_back(worker, static_cast<std::size_t>(t), static_cast<std::size_t>(workers));
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return assignment;
}

RoutingAssignment oracle_route(const CorrectnessMatrix& matrix,
                               const std::vector<std::string>& zoo_model_ids) {
  if (zoo_model_ids.empty()) throw DataError("oracle routing requires a non-empty zoo");
  std::vector<std::string> ids(zoo_model_ids.begin(), zoo_model_ids.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (const auto& id : ids) rows.push_back(matrix.model_index(id));

  RoutingAssignment assignment;
  assignment.decisions.reserve(matrix.num_instructions());
  for (std::size_t i = 0; i < matrix.num_instructions(); ++i) {
    RoutingDecision d;
    d.instruction_id = matrix.instruction_ids()[i];
    d.chosen_model = ids.front();
    for (std::size_t m = 0; m < ids.size(); ++m) {
      bool correct = matrix.cell(rows[m], i);
      d.scores[ids[m]] = correct ? 1.0 : 0.0;
      if (correct && d.scores.at(d.chosen_model) != 1.0) d.chosen_model = ids[m];
    }
    assignment.decisions.push_back(std::move(d));
  }
  return assignment;
}

RoutingAssignment read_assignment_jsonl(const std::string& path) {
  RoutingAssignment assignment;
  for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    try {
      json j = json::parse(line);
      RoutingDecision d;
      d.instruction_id = j.at("instruction_id").get<std::string>();
      d.chosen_model = j.at("chosen_model").get<std::string>();
      for (const auto& [id, s] : j.at("scores").items()) d.scores[id] = s.get<double>();
      if (j.contains("perturbation_seeds"))
        d.perturbation_seeds = j.at("perturbation_seeds").get<std::vector<uint64_t>>();
      assignment.decisions.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed decision: " + e.what());
    }
  });
  return assignment;
}

void write_assignment_jsonl(const RoutingAssignment& assignment, const std::string& path) {
  std::ostringstream out;
  for (const auto& d : assignment.decisions) {
    json j;
    j["instruction_id"] = d.instruction_id;
    j["chosen_model"] = d.chosen_model;
    j["scores"] = d.scores;
    j["perturbation_seeds"] = d.perturbation_seeds;
    out << j.dump() << '\n';
  }
  write_file(path, out.str());
}

}  // namespace caproute
