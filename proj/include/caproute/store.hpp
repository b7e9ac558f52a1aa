#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace caproute {

enum class Split { train, test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

/// One user instruction with its answer key, dataset tag and task tags.
struct Instruction {
  std::string id;
  std::string dataset;
  std::vector<std::string> task_tags;  // category path, e.g. {"mathematics", "high_school"}
  std::string text;
  std::optional<std::vector<std::string>> options;  // multiple-choice only
  std::string answer;
  Split split = Split::train;

  bool is_multiple_choice() const { return options.has_value(); }
  /// Task identity: the tag path joined with '/'.
  std::string task_key() const;
};

/// Immutable-after-construction collection of instructions indexed by id.
class InstructionStore {
 public:
  void add(Instruction ins);  // throws DataError on duplicate id
  bool has(const std::string& id) const { return by_id_.count(id) > 0; }
  const Instruction& get(const std::string& id) const;  // throws DataError if absent
  const std::vector<Instruction>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }

  std::vector<const Instruction*> by_split(Split s) const;

 private:
  std::vector<Instruction> items_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// One model output for one instruction under one option rotation.
/// rotation_id 0 is the original option order.
struct EvalRecord {
  std::string model_id;
  std::string instruction_id;
  std::string output;
  bool correct = false;
  int rotation_id = 0;
};

/// All evaluation records, indexed by (model, instruction, rotation).
class EvalSet {
 public:
  void add(EvalRecord rec);  // throws DataError on duplicate key
  const std::vector<EvalRecord>& records() const { return records_; }
  std::optional<bool> lookup(const std::string& model_id, const std::string& instruction_id,
                             int rotation_id) const;
  /// Sorted unique model ids appearing in any record.
  std::vector<std::string> model_ids() const;
  /// Sorted unique instruction ids with a rotation-0 record.
  std::vector<std::string> rotation0_instruction_ids() const;

 private:
  static std::string key(const std::string& m, const std::string& i, int r);
  std::vector<EvalRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// JSON-lines ingestion. Errors carry the offending line number or id.
InstructionStore read_instructions_jsonl(const std::string& path);
void write_instructions_jsonl(const InstructionStore& store, const std::string& path);

/// Every record must reference a known instruction id in `store`.
EvalSet read_evals_jsonl(const std::string& path, const InstructionStore& store);
void write_evals_jsonl(const EvalSet& evals, const std::string& path);

}  // namespace caproute
