#include "caproute/store.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "caproute/errors.hpp"
#include "file_util.hpp"

using nlohmann::json;

namespace caproute {

std::string to_string(Split s) { return s == Split::train ? "train" : "test"; }

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw DataError("unknown split value: '" + s + "'");
}

std::string Instruction::task_key() const {
  std::string key;
  for (std::size_t i = 0; i < task_tags.size(); ++i) {
    if (i > 0) key += '/';
    key += task_tags[i];
  }
  return key;
}

void InstructionStore::add(Instruction ins) {
  if (by_id_.count(ins.id)) throw DataError("duplicate instruction id: '" + ins.id + "'");
  by_id_.emplace(ins.id, items_.size());
  items_.push_back(std::move(ins));
}

const Instruction& InstructionStore::get(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw DataError("unknown instruction id: '" + id + "'");
  return items_[it->second];
}

std::vector<const Instruction*> InstructionStore::by_split(Split s) const {
  std::vector<const Instruction*> out;
  for (const auto& ins : items_)
    if (ins.split == s) out.push_back(&ins);
  return out;
}

void EvalSet::add(EvalRecord rec) {
  std::string k = key(rec.model_id, rec.instruction_id, rec.rotation_id);
  if (index_.count(k))
    throw DataError("duplicate eval record for (" + rec.model_id + ", " + rec.instruction_id +
                    ", rotation " + std::to_string(rec.rotation_id) + ")");
  index_.emplace(std::move(k), records_.size());
  records_.push_back(std::move(rec));
}

std::optional<bool> EvalSet::lookup(const std::string& model_id,
                                    const std::string& instruction_id, int rotation_id) const {
  auto it = index_.find(key(model_id, instruction_id, rotation_id));
  if (it == index_.end()) return std::nullopt;
  return records_[it->second].correct;
}

std::vector<std::string> EvalSet::model_ids() const {
  std::set<std::string> ids;
  for (const auto& r : records_) ids.insert(r.model_id);
  return {ids.begin(), ids.end()};
}

std::vector<std::string> EvalSet::rotation0_instruction_ids() const {
  std::set<std::string> ids;
  for (const auto& r : records_)
    if (r.rotation_id == 0) ids.insert(r.instruction_id);
  return {ids.begin(), ids.end()};
}

std::string EvalSet::key(const std::string& m, const std::string& i, int r) {
  std::string k;
  k.reserve(m.size() + i.size() + 8);
  k += m;
  k += '\x1f';
  k += i;
  k += '\x1f';
  k += std::to_string(r);
  return k;
}

namespace {

json instruction_to_json(const Instruction& ins) {
  json j;
  j["id"] = ins.id;
  j["dataset"] = ins.dataset;
  j["task_tags"] = ins.task_tags;
  j["text"] = ins.text;
  if (ins.options) j["options"] = *ins.options;
  j["answer"] = ins.answer;
  j["split"] = to_string(ins.split);
  return j;
}

Instruction instruction_from_json(const json& j) {
  Instruction ins;
  ins.id = j.at("id").get<std::string>();
  ins.dataset = j.at("dataset").get<std::string>();
  ins.task_tags = j.at("task_tags").get<std::vector<std::string>>();
  ins.text = j.at("text").get<std::string>();
  if (j.contains("options")) ins.options = j.at("options").get<std::vector<std::string>>();
  ins.answer = j.at("answer").get<std::string>();
  ins.split = split_from_string(j.at("split").get<std::string>());
  if (ins.options) {
    auto matches = std::count(ins.options->begin(), ins.options->end(), ins.answer);
    if (matches != 1)
      throw DataError("instruction '" + ins.id + "': answer must equal exactly one option (" +
                      std::to_string(matches) + " matches)");
  }
  return ins;
}

}  // namespace

InstructionStore read_instructions_jsonl(const std::string& path) {
  InstructionStore store;
  for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    json j;
    try {
      j = json::parse(line);
      store.add(instruction_from_json(j));
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed instruction: " +
                      e.what());
    }
  });
  return store;
}

void write_instructions_jsonl(const InstructionStore& store, const std::string& path) {
  std::ostringstream out;
  for (const auto& ins : store.items()) out << instruction_to_json(ins).dump() << '\n';
  write_file(path, out.str());
}

EvalSet read_evals_jsonl(const std::string& path, const InstructionStore& store) {
  EvalSet evals;
  for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    EvalRecord rec;
    try {
      json j = json::parse(line);
      rec.model_id = j.at("model_id").get<std::string>();
      rec.instruction_id = j.at("instruction_id").get<std::string>();
      rec.output = j.value("output", std::string{});
      rec.correct = j.at("correct").get<bool>();
      rec.rotation_id = j.value("rotation_id", 0);
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed eval record: " +
                      e.what());
    }
    if (rec.rotation_id < 0)
      throw DataError(path + ":" + std::to_string(lineno) + ": negative rotation_id");
    if (!store.has(rec.instruction_id))
      throw DataError(path + ":" + std::to_string(lineno) + ": eval references unknown instruction id: '" +
                      rec.instruction_id + "'");
    evals.add(std::move(rec));
  });
  return evals;
}

void write_evals_jsonl(const EvalSet& evals, const std::string& path) {
  std::ostringstream out;
  for (const auto& r : evals.records()) {
    json j;
    j["model_id"] = r.model_id;
    j["instruction_id"] = r.instruction_id;
    j["output"] = r.output;
    j["correct"] = r.correct;
    j["rotation_id"] = r.rotation_id;
    out << j.dump() << '\n';
  }
  write_file(path, out.str());
}

}  // namespace caproute
