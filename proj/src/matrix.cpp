#include "caproute/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "caproute/errors.hpp"
#include "file_util.hpp"

using nlohmann::json;

namespace caproute {

CorrectnessMatrix::CorrectnessMatrix(std::vector<std::string> model_ids,
                                     std::vector<std::string> instruction_ids,
                                     std::vector<uint8_t> cells, bool refined)
    : model_ids_(std::move(model_ids)),
      instruction_ids_(std::move(instruction_ids)),
      cells_(std::move(cells)),
      refined_(refined) {
  if (cells_.size() != model_ids_.size() * instruction_ids_.size())
    throw DataError("correctness matrix: cell count does not match axis sizes");
  for (std::size_t i = 0; i < model_ids_.size(); ++i) model_index_[model_ids_[i]] = i;
  for (std::size_t i = 0; i < instruction_ids_.size(); ++i)
    instruction_index_[instruction_ids_[i]] = i;
  if (model_index_.size() != model_ids_.size())
    throw DataError("correctness matrix: duplicate model id");
  if (instruction_index_.size() != instruction_ids_.size())
    throw DataError("correctness matrix: duplicate instruction id");
}

std::size_t CorrectnessMatrix::model_index(const std::string& id) const {
  auto it = model_index_.find(id);
  if (it == model_index_.end()) throw DataError("model not in matrix: '" + id + "'");
  return it->second;
}

std::size_t CorrectnessMatrix::instruction_index(const std::string& id) const {
  auto it = instruction_index_.find(id);
  if (it == instruction_index_.end()) throw DataError("instruction not in matrix: '" + id + "'");
  return it->second;
}

bool CorrectnessMatrix::cell(const std::string& model_id, const std::string& instruction_id) const {
  return cell(model_index(model_id), instruction_index(instruction_id));
}

double CorrectnessMatrix::fraction_correct(std::size_t instruction) const {
  if (model_ids_.empty()) return 0.0;
  std::size_t n = 0;
  for (std::size_t m = 0; m < model_ids_.size(); ++m)
    if (cell(m, instruction)) ++n;
  return static_cast<double>(n) / static_cast<double>(model_ids_.size());
}

double CorrectnessMatrix::model_accuracy(std::size_t model) const {
  if (instruction_ids_.empty()) return 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < instruction_ids_.size(); ++i)
    if (cell(model, i)) ++n;
  return static_cast<double>(n) / static_cast<double>(instruction_ids_.size());
}

CorrectnessMatrix CorrectnessMatrix::restrict(const std::vector<std::string>& model_ids,
                                              const std::vector<std::string>& instruction_ids) const {
  std::vector<std::string> ms(model_ids.begin(), model_ids.end());
  std::vector<std::string> is(instruction_ids.begin(), instruction_ids.end());
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  std::sort(is.begin(), is.end());
  is.erase(std::unique(is.begin(), is.end()), is.end());

  std::vector<uint8_t> cells(ms.size() * is.size());
  for (std::size_t m = 0; m < ms.size(); ++m) {
    std::size_t src_m = model_index(ms[m]);
    for (std::size_t i = 0; i < is.size(); ++i)
      cells[m * is.size() + i] = cell(src_m, instruction_index(is[i])) ? 1 : 0;
  }
  return CorrectnessMatrix(std::move(ms), std::move(is), std::move(cells), refined_);
}

CorrectnessMatrix CorrectnessMatrix::restrict_models(const std::vector<std::string>& model_ids) const {
  return restrict(model_ids, instruction_ids_);
}

CorrectnessMatrix CorrectnessMatrix::restrict_instructions(
    const std::vector<std::string>& instruction_ids) const {
  return restrict(model_ids_, instruction_ids);
}

CorrectnessMatrix build_correctness_matrix(const EvalSet& evals) {
  std::vector<std::string> models = evals.model_ids();
  std::vector<std::string> instructions = evals.rotation0_instruction_ids();

  std::vector<uint8_t> cells(models.size() * instructions.size(), 0);
  std::vector<std::string> gaps;
  for (std::size_t m = 0; m < models.size(); ++m) {
    for (std::size_t i = 0; i < instructions.size(); ++i) {
      auto c = evals.lookup(models[m], instructions[i], 0);
      if (!c) {
        if (gaps.size() < 8)
          gaps.push_back("(" + models[m] + ", " + instructions[i] + ")");
        else if (gaps.size() == 8)
          gaps.push_back("...");
        continue;
      }
      cells[m * instructions.size() + i] = *c ? 1 : 0;
    }
  }
  if (!gaps.empty()) {
    std::string msg = "incomplete eval coverage; missing rotation-0 cells:";
    for (const auto& g : gaps) msg += " " + g;
    throw DataError(msg);
  }
  return CorrectnessMatrix(std::move(models), std::move(instructions), std::move(cells), false);
}

CorrectnessMatrix circle_test_refine(const CorrectnessMatrix& matrix, const EvalSet& evals,
                                     const InstructionStore& store, double hardness_threshold) {
  if (hardness_threshold < 0.0 || hardness_threshold > 1.0)
    throw DataError("hardness_threshold must lie in [0, 1]");

  CorrectnessMatrix out = matrix;
  std::vector<std::string> gaps;
  for (std::size_t i = 0; i < matrix.num_instructions(); ++i) {
    const Instruction& ins = store.get(matrix.instruction_ids()[i]);
    if (!ins.is_multiple_choice()) continue;  // free-form: untouched
    std::size_t num_options = ins.options->size();
    if (num_options < 2) continue;
    if (matrix.fraction_correct(i) > hardness_threshold) continue;  // not hard enough

    for (std::size_t m = 0; m < matrix.num_models(); ++m) {
      if (!matrix.cell(m, i)) continue;  // false never flips back
      bool survives = true;
      for (std::size_t r = 1; r < num_options; ++r) {
        auto c = evals.lookup(matrix.model_ids()[m], ins.id, static_cast<int>(r));
        if (!c) {
          if (gaps.size() < 8)
            gaps.push_back("(" + matrix.model_ids()[m] + ", " + ins.id + ", rotation " +
                           std::to_string(r) + ")");
          else if (gaps.size() == 8)
            gaps.push_back("...");
          survives = false;
          continue;
        }
        if (!*c) survives = false;
      }
      if (!survives) out.set_cell(m, i, false);
    }
  }
  if (!gaps.empty()) {
    std::string msg = "circle test: missing rotation records:";
    for (const auto& g : gaps) msg += " " + g;
    throw DataError(msg);
  }
  out.set_refined(true);
  return out;
}

std::vector<double> distinguishability_weights(const CorrectnessMatrix& matrix) {
  if (matrix.num_models() == 0 || matrix.num_instructions() == 0)
    throw DataError("distinguishability weights require a non-empty matrix");
  std::vector<double> w(matrix.num_instructions());
  for (std::size_t i = 0; i < matrix.num_instructions(); ++i) {
    double p = matrix.fraction_correct(i);
    w[i] = 1.0 - std::abs(2.0 * p - 1.0);
  }
  return w;
}

CorrectnessMatrix read_matrix_json(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path + ": malformed matrix json: " + e.what());
  }
  std::vector<std::string> models = j.at("model_ids").get<std::vector<std::string>>();
  std::vector<std::string> instructions = j.at("instruction_ids").get<std::vector<std::string>>();
  std::vector<std::string> rows = j.at("rows").get<std::vector<std::string>>();
  if (rows.size() != models.size()) throw DataError(path + ": row count != model count");
  std::vector<uint8_t> cells;
  cells.reserve(models.size() * instructions.size());
  for (const auto& row : rows) {
    if (row.size() != instructions.size())
      throw DataError(path + ": row length != instruction count");
    for (char c : row) {
      if (c != '0' && c != '1') throw DataError(path + ": matrix rows must be 0/1 strings");
      cells.push_back(c == '1' ? 1 : 0);
    }
  }
  return CorrectnessMatrix(std::move(models), std::move(instructions), std::move(cells),
                           j.value("refined", false));
}

void write_matrix_json(const CorrectnessMatrix& matrix, const std::string& path) {
  json j;
  j["model_ids"] = matrix.model_ids();
  j["instruction_ids"] = matrix.instruction_ids();
  std::vector<std::string> rows;
  rows.reserve(matrix.num_models());
  for (std::size_t m = 0; m < matrix.num_models(); ++m) {
    std::string row(matrix.num_instructions(), '0');
    for (std::size_t i = 0; i < matrix.num_instructions(); ++i)
      if (matrix.cell(m, i)) row[i] = '1';
    rows.push_back(std::move(row));
  }
  j["rows"] = rows;
  j["refined"] = matrix.refined();
  write_file(path, j.dump(2) + "\n");
}

}  // namespace caproute
