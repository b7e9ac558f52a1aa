#include "caproute/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "caproute/errors.hpp"
#include "file_util.hpp"

using nlohmann::json;

namespace caproute {

std::vector<std::string> Zoo::member_ids() const {
  std::vector<std::string> ids;
  ids.reserve(members.size());
  for (const auto& m : members) ids.push_back(m.model_id);
  return ids;
}

CapabilityRepresentation run_aptitude_test(const std::string& model_id, const EvalSet& evals,
                                           const CoreTaskSet& core) {
  CapabilityRepresentation rep;
  rep.model_id = model_id;
  std::vector<std::string> gaps;
  for (const auto& task : core.tasks) {
    int correct = 0;
    for (const auto& id : task.instruction_ids) {
      auto c = evals.lookup(model_id, id, 0);
      if (!c) {
        if (gaps.size() < 8)
          gaps.push_back("(" + task.task_name + ", " + id + ")");
        else if (gaps.size() == 8)
          gaps.push_back("...");
        continue;
      }
      if (*c) ++correct;
    }
    TaskResult tr;
    tr.task_name = task.task_name;
    tr.keywords = task.keywords;
    tr.accuracy = static_cast<double>(correct) / static_cast<double>(task.instruction_ids.size());
    rep.results.push_back(std::move(tr));
  }
  if (!gaps.empty()) {
    std::string msg = "aptitude test for '" + model_id + "': missing core-task evals:";
    for (const auto& g : gaps) msg += " " + g;
    throw DataError(msg);
  }
  return rep;
}

namespace {

std::string format_percent(double accuracy) {
  double pct = accuracy * 100.0;
  double rounded = std::round(pct);
  char buf[32];
  if (std::abs(pct - rounded) < 1e-9)
    std::snprintf(buf, sizeof(buf), "%.0f", rounded);
  else
    std::snprintf(buf, sizeof(buf), "%.1f", pct);
  return buf;
}

}  // namespace

std::string render_capability_text(const CapabilityRepresentation& rep,
                                   const std::vector<int>* permutation) {
  std::size_t n = rep.results.size();
  std::vector<int> order(n);
  if (permutation) {
    if (permutation->size() != n)
      throw DataError("capability rendering: permutation size != task count");
    std::vector<bool> seen(n, false);
    for (int idx : *permutation) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= n || seen[static_cast<std::size_t>(idx)])
        throw DataError("capability rendering: permutation is not a bijection");
      seen[static_cast<std::size_t>(idx)] = true;
    }
    order = *permutation;
  } else {
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  }

  std::ostringstream out;
  for (std::size_t i = 0; i < n; ++i) {
    const TaskResult& tr = rep.results[static_cast<std::size_t>(order[i])];
    out << "The model achieves accuracy " << format_percent(tr.accuracy) << "% on the task of '"
        << tr.keywords[0] << ", " << tr.keywords[1] << ", " << tr.keywords[2] << ", "
        << tr.keywords[3] << ", " << tr.keywords[4] << "'.\n";
  }
  if (rep.notes && !rep.notes->empty()) out << "Notes: " << *rep.notes << "\n";
  return out.str();
}

Zoo update_zoo_incremental(const Zoo& zoo, const ModelRecord& newcomer,
                           const CapabilityRepresentation& newcomer_rep,
                           const std::map<std::string, double>& history_scores) {
  std::map<std::string, const ModelRecord*> candidates;
  for (const auto& m : zoo.members) candidates[m.model_id] = &m;
  candidates[newcomer.model_id] = &newcomer;

  std::vector<std::pair<std::string, double>> scored;
  for (const auto& [id, rec] : candidates) {
    auto it = history_scores.find(id);
    if (it == history_scores.end())
      throw DataError("zoo update: missing history score for '" + id + "'");
    scored.emplace_back(id, it->second);
  }
  // Highest score first, ties to the lexicographically smaller id (the map
  // iteration order already provides it for the stable sort).
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::set<std::string> keep;
  for (std::size_t i = 0; i < scored.size() && i < 5; ++i) keep.insert(scored[i].first);
  keep.insert(newcomer.model_id);

  Zoo out;
  for (const auto& id : keep) {
    const ModelRecord* rec = candidates.at(id);
    out.members.push_back(*rec);
    if (id == newcomer.model_id) {
      out.representations[id] = newcomer_rep;
    } else {
      auto it = zoo.representations.find(id);
      if (it == zoo.representations.end())
        throw DataError("zoo update: member '" + id + "' has no capability representation");
      out.representations[id] = it->second;
    }
  }
  return out;
}

namespace {

json model_record_to_json(const ModelRecord& m) {
  json j;
  j["model_id"] = m.model_id;
  if (m.params_b) j["params_b"] = *m.params_b;
  if (m.notes) j["notes"] = *m.notes;
  if (m.release_index) j["release_index"] = *m.release_index;
  return j;
}

ModelRecord model_record_from_json(const json& j) {
  ModelRecord m;
  m.model_id = j.at("model_id").get<std::string>();
  if (j.contains("params_b")) m.params_b = j.at("params_b").get<double>();
  if (j.contains("notes")) m.notes = j.at("notes").get<std::string>();
  if (j.contains("release_index")) m.release_index = j.at("release_index").get<int>();
  return m;
}

json representation_to_json(const CapabilityRepresentation& rep) {
  json results = json::array();
  for (const auto& tr : rep.results) {
    json r;
    r["task_name"] = tr.task_name;
    r["keywords"] = std::vector<std::string>(tr.keywords.begin(), tr.keywords.end());
    r["accuracy"] = tr.accuracy;
    results.push_back(r);
  }
  json j;
  j["model_id"] = rep.model_id;
  j["results"] = results;
  if (rep.notes) j["notes"] = *rep.notes;
  return j;
}

CapabilityRepresentation representation_from_json(const json& j) {
  CapabilityRepresentation rep;
  rep.model_id = j.at("model_id").get<std::string>();
  for (const auto& r : j.at("results")) {
    TaskResult tr;
    tr.task_name = r.at("task_name").get<std::string>();
    auto kws = r.at("keywords").get<std::vector<std::string>>();
    if (kws.size() != 5)
      throw DataError("representation for '" + rep.model_id + "': task '" + tr.task_name +
                      "' needs 5 keywords");
    std::copy(kws.begin(), kws.end(), tr.keywords.begin());
    tr.accuracy = r.at("accuracy").get<double>();
    rep.results.push_back(std::move(tr));
  }
  if (j.contains("notes")) rep.notes = j.at("notes").get<std::string>();
  return rep;
}

}  // namespace

Zoo read_zoo_json(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path + ": malformed zoo json: " + e.what());
  }
  Zoo zoo;
  for (const auto& m : j.at("members")) zoo.members.push_back(model_record_from_json(m));
  for (const auto& [id, rep] : j.at("representations").items())
    zoo.representations[id] = representation_from_json(rep);
  for (const auto& m : zoo.members)
    if (!zoo.representations.count(m.model_id))
      throw DataError(path + ": member '" + m.model_id + "' has no representation");
  return zoo;
}

void write_zoo_json(const Zoo& zoo, const std::string& path) {
  json members = json::array();
  for (const auto& m : zoo.members) members.push_back(model_record_to_json(m));
  json reps = json::object();
  for (const auto& [id, rep] : zoo.representations) reps[id] = representation_to_json(rep);
  json j;
  j["members"] = members;
  j["representations"] = reps;
  write_file(path, j.dump(2) + "\n");
}

}  // namespace caproute
