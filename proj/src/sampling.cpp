#include "caproute/sampling.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "caproute/errors.hpp"
#include "caproute/rng.hpp"
#include "file_util.hpp"

using nlohmann::json;

namespace caproute {

bool CoreTaskSet::contains_instruction(const std::string& id) const {
  for (const auto& t : tasks)
    if (std::find(t.instruction_ids.begin(), t.instruction_ids.end(), id) !=
        t.instruction_ids.end())
      return true;
  return false;
}

std::vector<std::string> CoreTaskSet::all_instruction_ids() const {
  std::vector<std::string> out;
  for (const auto& t : tasks) out.insert(out.end(), t.instruction_ids.begin(), t.instruction_ids.end());
  return out;
}

namespace {

std::vector<std::string> whitespace_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

/// Draw `count` indices without replacement, probability proportional to
/// weight; uniform among the remainder once all remaining weights are zero.
std::vector<std::size_t> weighted_sample_without_replacement(const std::vector<double>& weights,
                                                             std::size_t count, Rng& rng) {
  std::vector<std::size_t> pool(weights.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  std::vector<std::size_t> picked;
  picked.reserve(count);
  while (picked.size() < count && !pool.empty()) {
    double total = 0.0;
    for (std::size_t idx : pool) total += weights[idx];
    std::size_t choice;
    if (total <= 0.0) {
      choice = rng.uniform_index(pool.size());
    } else {
      double r = rng.uniform01() * total;
      double acc = 0.0;
      choice = pool.size() - 1;  // guard against accumulated rounding
      for (std::size_t p = 0; p < pool.size(); ++p) {
        acc += weights[pool[p]];
        if (r < acc) {
          choice = p;
          break;
        }
      }
    }
    picked.push_back(pool[choice]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(choice));
  }
  return picked;
}

std::array<std::string, 5> pick_keywords(const std::vector<const Instruction*>& sampled) {
  // Most frequent whitespace tokens of the task tags, padded from the
  // instruction texts. Ties break lexicographically.
  std::map<std::string, int> tag_freq;
  std::map<std::string, int> text_freq;
  for (const Instruction* ins : sampled) {
    for (const auto& tag : ins->task_tags)
      for (auto& tok : whitespace_tokens(tag)) ++tag_freq[tok];
    for (auto& tok : whitespace_tokens(ins->text)) ++text_freq[tok];
  }
  auto ranked = [](const std::map<std::string, int>& freq) {
    std::vector<std::pair<std::string, int>> v(freq.begin(), freq.end());
    std::stable_sort(v.begin(), v.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return v;
  };
  std::array<std::string, 5> keywords;
  std::size_t n = 0;
  std::set<std::string> used;
  for (const auto& [tok, cnt] : ranked(tag_freq)) {
    if (n == 5) break;
    if (used.insert(tok).second) keywords[n++] = tok;
  }
  for (const auto& [tok, cnt] : ranked(text_freq)) {
    if (n == 5) break;
    if (used.insert(tok).second) keywords[n++] = tok;
  }
  while (n < 5) keywords[n++] = "misc";
  return keywords;
}

}  // namespace

CoreTaskSet sample_core_tasks(const InstructionStore& store, const CorrectnessMatrix& matrix,
                              int num_tasks, int shots, uint64_t seed) {
  if (num_tasks <= 0 || shots <= 0) throw DataError("num_tasks and shots must be positive");

  std::vector<double> weights = distinguishability_weights(matrix);

  // Train-split instructions present in the matrix, grouped by task key.
  std::map<std::string, std::vector<const Instruction*>> groups;
  for (const auto& ins : store.items()) {
    if (ins.split != Split::train) continue;
    if (!matrix.has_instruction(ins.id)) continue;
    groups[ins.task_key()].push_back(&ins);
  }

  struct Candidate {
    std::string name;
    const std::vector<const Instruction*>* members;
    double mean_weight;
  };
  std::vector<Candidate> candidates;
  for (const auto& [name, members] : groups) {
    if (static_cast<int>(members.size()) < shots) continue;
    double sum = 0.0;
    for (const Instruction* ins : members) sum += weights[matrix.instruction_index(ins->id)];
    candidates.push_back({name, &members, sum / static_cast<double>(members.size())});
  }
  if (static_cast<int>(candidates.size()) < num_tasks)
    throw DataError("core task sampling: need " + std::to_string(num_tasks) + " tasks with >= " +
                    std::to_string(shots) + " train instructions, found " +
                    std::to_string(candidates.size()));

  // Highest mean distinguishability first; candidates arrive name-sorted so
  // the stable sort breaks ties lexicographically.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.mean_weight > b.mean_weight; });
  candidates.resize(static_cast<std::size_t>(num_tasks));
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.name < b.name; });

  CoreTaskSet core;
  for (const auto& cand : candidates) {
    const auto& members = *cand.members;
    std::vector<double> member_weights(members.size());
    for (std::size_t i = 0; i < members.size(); ++i)
      member_weights[i] = weights[matrix.instruction_index(members[i]->id)];

    Rng rng(Rng::derive(seed, cand.name));
    auto picked = weighted_sample_without_replacement(member_weights,
                                                      static_cast<std::size_t>(shots), rng);
    std::vector<const Instruction*> sampled;
    for (std::size_t idx : picked) sampled.push_back(members[idx]);

    CoreTask task;
    task.task_name = cand.name;
    task.keywords = pick_keywords(sampled);
    for (const Instruction* ins : sampled) task.instruction_ids.push_back(ins->id);
    std::sort(task.instruction_ids.begin(), task.instruction_ids.end());
    core.tasks.push_back(std::move(task));
  }
  return core;
}

BatchBuildResult build_training_batches(const CorrectnessMatrix& matrix,
                                        const InstructionStore& store, const CoreTaskSet& core,
                                        int k, int batches_per_model,
                                        const std::vector<double>& model_rank_weights,
                                        uint64_t seed) {
  if (k < 2) throw DataError("batch size k must be >= 2");
  if (batches_per_model < 0) throw DataError("batches_per_model must be >= 0");
  if (!model_rank_weights.empty() && model_rank_weights.size() != matrix.num_models())
    throw DataError("model_rank_weights length must match the matrix model count");

  std::unordered_set<std::string> core_ids;
  for (const auto& id : core.all_instruction_ids()) core_ids.insert(id);

  // Candidate supervision pools per model: train split, outside the core set.
  std::vector<std::vector<std::size_t>> positives(matrix.num_models());
  std::vector<std::vector<std::size_t>> negatives(matrix.num_models());
  for (std::size_t i = 0; i < matrix.num_instructions(); ++i) {
    const std::string& id = matrix.instruction_ids()[i];
    if (core_ids.count(id)) continue;
    const Instruction& ins = store.get(id);
    if (ins.split != Split::train) continue;
    for (std::size_t m = 0; m < matrix.num_models(); ++m)
      (matrix.cell(m, i) ? positives : negatives)[m].push_back(i);
  }

  BatchBuildResult result;
  std::vector<std::size_t> eligible;
  std::vector<double> eligible_weights;
  for (std::size_t m = 0; m < matrix.num_models(); ++m) {
    if (positives[m].empty() || static_cast<int>(negatives[m].size()) < k - 1) {
      ++result.skipped_models;
      result.warnings.push_back("model '" + matrix.model_ids()[m] +
                                "' skipped: " + std::to_string(positives[m].size()) +
                                " positives, " + std::to_string(negatives[m].size()) +
                                " negatives (need 1 and " + std::to_string(k - 1) + ")");
      continue;
    }
    eligible.push_back(m);
    eligible_weights.push_back(model_rank_weights.empty() ? 1.0 : model_rank_weights[m]);
  }
  if (eligible.empty()) return result;

  double weight_total = 0.0;
  for (double w : eligible_weights) weight_total += w;
  if (weight_total <= 0.0) {
    eligible_weights.assign(eligible_weights.size(), 1.0);
    weight_total = static_cast<double>(eligible_weights.size());
  }

  Rng rng(Rng::derive(seed, "batches"));
  std::size_t total = eligible.size() * static_cast<std::size_t>(batches_per_model);
  result.batches.reserve(total);
  for (std::size_t b = 0; b < total; ++b) {
    double r = rng.uniform01() * weight_total;
    double acc = 0.0;
    std::size_t pick = eligible.size() - 1;
    for (std::size_t e = 0; e < eligible.size(); ++e) {
      acc += eligible_weights[e];
      if (r < acc) {
        pick = e;
        break;
      }
    }
    std::size_t m = eligible[pick];

    TrainingBatch batch;
    batch.model_id = matrix.model_ids()[m];
    batch.positive = matrix.instruction_ids()[positives[m][rng.uniform_index(positives[m].size())]];

    // k-1 distinct negatives via partial Fisher-Yates over a scratch copy.
    std::vector<std::size_t> scratch = negatives[m];
    for (int j = 0; j < k - 1; ++j) {
      std::size_t swap_at = static_cast<std::size_t>(j) + rng.uniform_index(scratch.size() - j);
      std::swap(scratch[j], scratch[swap_at]);
      batch.negatives.push_back(matrix.instruction_ids()[scratch[j]]);
    }
    batch.y_pos = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(k)));
    result.batches.push_back(std::move(batch));
  }
  return result;
}

CoreTaskSet read_core_tasks_json(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path + ": malformed core task json: " + e.what());
  }
  CoreTaskSet core;
  for (const auto& t : j.at("tasks")) {
    CoreTask task;
    task.task_name = t.at("task_name").get<std::string>();
    auto kws = t.at("keywords").get<std::vector<std::string>>();
    if (kws.size() != 5) throw DataError(path + ": task '" + task.task_name + "' needs 5 keywords");
    std::copy(kws.begin(), kws.end(), task.keywords.begin());
    task.instruction_ids = t.at("instruction_ids").get<std::vector<std::string>>();
    core.tasks.push_back(std::move(task));
  }
  return core;
}

void write_core_tasks_json(const CoreTaskSet& core, const std::string& path) {
  json tasks = json::array();
  for (const auto& t : core.tasks) {
    json tj;
    tj["task_name"] = t.task_name;
    tj["keywords"] = std::vector<std::string>(t.keywords.begin(), t.keywords.end());
    tj["instruction_ids"] = t.instruction_ids;
    tasks.push_back(tj);
  }
  json j;
  j["tasks"] = tasks;
  write_file(path, j.dump(2) + "\n");
}

}  // namespace caproute
