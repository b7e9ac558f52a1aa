#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "caproute/sampling.hpp"
#include "caproute/store.hpp"

namespace caproute {

struct ModelRecord {
  std::string model_id;
  std::optional<double> params_b;       // billions of parameters, metadata only
  std::optional<std::string> notes;     // expert knowledge, e.g. supported languages
  std::optional<int> release_index;
};

struct TaskResult {
  std::string task_name;
  std::array<std::string, 5> keywords;
  double accuracy = 0.0;  // correct_count / shots
};

/// A model's aptitude-test results over the core tasks, the c^m the router
/// conditions on. Rendered to natural-language text for the encoder.
struct CapabilityRepresentation {
  std::string model_id;
  std::vector<TaskResult> results;  // one per core task, in core-set order
  std::optional<std::string> notes;
};

/// Candidate registry. A value type: updates return a new Zoo.
struct Zoo {
  std::vector<ModelRecord> members;  // sorted by model_id
  std::map<std::string, CapabilityRepresentation> representations;

  bool has(const std::string& model_id) const { return representations.count(model_id) > 0; }
  std::vector<std::string> member_ids() const;
};

/// Score one model on every core task from its rotation-0 eval records.
/// Every core instruction must have a record for the model.
CapabilityRepresentation run_aptitude_test(const std::string& model_id, const EvalSet& evals,
                                           const CoreTaskSet& core);

/// One line per task:
///   The model achieves accuracy {pct}% on the task of '{kw1}, {kw2}, {kw3}, {kw4}, {kw5}'.
/// pct prints as an integer when whole, else with one decimal. When notes
/// exist a final `Notes: {notes}` line is appended. `permutation`, if given,
/// must be a bijection on the task indices.
std::string render_capability_text(const CapabilityRepresentation& rep,
                                   const std::vector<int>* permutation = nullptr);

/// Keep the 5 highest-scoring models seen so far plus the newcomer.
/// Candidates are the current members and the newcomer; every candidate must
/// have a history score. Ties break lexicographically by model_id.
Zoo update_zoo_incremental(const Zoo& zoo, const ModelRecord& newcomer,
                           const CapabilityRepresentation& newcomer_rep,
                           const std::map<std::string, double>& history_scores);

Zoo read_zoo_json(const std::string& path);
void write_zoo_json(const Zoo& zoo, const std::string& path);

}  // namespace caproute
