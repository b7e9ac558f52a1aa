#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "caproute/store.hpp"

namespace caproute {

/// Dense boolean model × instruction performance matrix at rotation 0.
/// Axes are kept sorted so the matrix is canonical regardless of record order.
class CorrectnessMatrix {
 public:
  CorrectnessMatrix() = default;
  CorrectnessMatrix(std::vector<std::string> model_ids, std::vector<std::string> instruction_ids,
                    std::vector<uint8_t> cells, bool refined = false);

  std::size_t num_models() const { return model_ids_.size(); }
  std::size_t num_instructions() const { return instruction_ids_.size(); }
  const std::vector<std::string>& model_ids() const { return model_ids_; }
  const std::vector<std::string>& instruction_ids() const { return instruction_ids_; }
  bool refined() const { return refined_; }
  void set_refined(bool v) { refined_ = v; }

  bool cell(std::size_t model, std::size_t instruction) const {
    return cells_[model * instruction_ids_.size() + instruction] != 0;
  }
  void set_cell(std::size_t model, std::size_t instruction, bool v) {
    cells_[model * instruction_ids_.size() + instruction] = v ? 1 : 0;
  }

  bool has_model(const std::string& id) const { return model_index_.count(id) > 0; }
  bool has_instruction(const std::string& id) const { return instruction_index_.count(id) > 0; }
  std::size_t model_index(const std::string& id) const;        // throws DataError if absent
  std::size_t instruction_index(const std::string& id) const;  // throws DataError if absent
  bool cell(const std::string& model_id, const std::string& instruction_id) const;

  /// Fraction of models correct on instruction column i.
  double fraction_correct(std::size_t instruction) const;
  /// Fraction of instructions the model answers correctly (row mean).
  double model_accuracy(std::size_t model) const;

  /// Submatrix over the given ids (each must exist). Axes re-sorted.
  CorrectnessMatrix restrict(const std::vector<std::string>& model_ids,
                             const std::vector<std::string>& instruction_ids) const;
  CorrectnessMatrix restrict_models(const std::vector<std::string>& model_ids) const;
  CorrectnessMatrix restrict_instructions(const std::vector<std::string>& instruction_ids) const;

 private:
  std::vector<std::string> model_ids_;
  std::vector<std::string> instruction_ids_;
  std::vector<uint8_t> cells_;  // row-major, model × instruction
  bool refined_ = false;
  std::unordered_map<std::string, std::size_t> model_index_;
  std::unordered_map<std::string, std::size_t> instruction_index_;
};

/// Complete matrix over observed models × rotation-0 instruction ids.
/// A model lacking a rotation-0 record for any referenced instruction is an
/// ingestion error (missing cells are never imputed).
CorrectnessMatrix build_correctness_matrix(const EvalSet& evals);

/// Re-check multiple-choice instructions that few models get right: a cell
/// survives only if the model is correct under every option rotation.
/// Never flips false to true; free-form and easy instructions are untouched.
CorrectnessMatrix circle_test_refine(const CorrectnessMatrix& matrix, const EvalSet& evals,
                                     const InstructionStore& store, double hardness_threshold);

/// w_i = 1 - |2 p_i - 1| where p_i is the fraction of models correct on
/// instruction i. Maximal when the models split evenly.
std::vector<double> distinguishability_weights(const CorrectnessMatrix& matrix);

CorrectnessMatrix read_matrix_json(const std::string& path);
void write_matrix_json(const CorrectnessMatrix& matrix, const std::string& path);

}  // namespace caproute
