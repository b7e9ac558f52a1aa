#include "caproute/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "caproute/errors.hpp"
#include "file_util.hpp"

using nlohmann::json;

namespace caproute {

namespace {

std::string format_cell(double percent) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", percent);
  return buf;
}

double dataset_mean(const std::map<std::string, double>& per_dataset) {
  if (per_dataset.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [name, v] : per_dataset) sum += v;
  return sum / static_cast<double>(per_dataset.size());
}

}  // namespace

BenchReport evaluate_assignment(const RoutingAssignment& assignment,
                                const CorrectnessMatrix& matrix, const InstructionStore& store) {
  BenchReport report;
  if (assignment.decisions.empty()) throw DataError("evaluate: empty assignment");

  // dataset → instruction column indices, in assignment order
  std::map<std::string, std::vector<std::size_t>> dataset_columns;
  std::map<std::string, std::size_t> routed_correct;
  std::set<std::string> seen;
  for (const auto& d : assignment.decisions) {
    if (!matrix.has_instruction(d.instruction_id))
      throw DataError("evaluate: instruction '" + d.instruction_id + "' not in matrix");
    if (!seen.insert(d.instruction_id).second)
      throw DataError("evaluate: duplicate decision for instruction '" + d.instruction_id + "'");
    const Instruction& ins = store.get(d.instruction_id);
    std::size_t col = matrix.instruction_index(d.instruction_id);
    dataset_columns[ins.dataset].push_back(col);
    if (matrix.cell(matrix.model_index(d.chosen_model), col)) ++routed_correct[ins.dataset];
  }

  for (const auto& [dataset, cols] : dataset_columns) {
    double correct = static_cast<double>(routed_correct[dataset]);
    report.per_dataset_accuracy[dataset] = 100.0 * correct / static_cast<double>(cols.size());
  }
  report.mean = dataset_mean(report.per_dataset_accuracy);

  // Baselines over the matrix's models, same unweighted-dataset-mean
  // convention as the headline number.
  for (std::size_t m = 0; m < matrix.num_models(); ++m) {
    std::map<std::string, double> per_dataset;
    for (const auto& [dataset, cols] : dataset_columns) {
      std::size_t correct = 0;
      for (std::size_t col : cols)
        if (matrix.cell(m, col)) ++correct;
      per_dataset[dataset] = 100.0 * static_cast<double>(correct) / static_cast<double>(cols.size());
    }
    report.per_model[matrix.model_ids()[m]] = dataset_mean(per_dataset);
  }
  double random_sum = 0.0;
  for (const auto& [id, acc] : report.per_model) random_sum += acc;
  report.random_baseline = random_sum / static_cast<double>(report.per_model.size());
  for (const auto& [id, acc] : report.per_model) {
    if (acc > report.best_single) {
      report.best_single = acc;
      report.best_single_model = id;
    }
  }
  if (report.best_single_model.empty()) report.best_single_model = report.per_model.begin()->first;

  std::map<std::string, double> oracle_per_dataset;
  for (const auto& [dataset, cols] : dataset_columns) {
    std::size_t covered = 0;
    for (std::size_t col : cols) {
      for (std::size_t m = 0; m < matrix.num_models(); ++m) {
        if (matrix.cell(m, col)) {
          ++covered;
          break;
        }
      }
    }
    oracle_per_dataset[dataset] = 100.0 * static_cast<double>(covered) / static_cast<double>(cols.size());
  }
  report.oracle = dataset_mean(oracle_per_dataset);
  return report;
}

CoverageReport coverage_analysis(const CorrectnessMatrix& matrix, const std::string& reference,
                                 const std::vector<std::string>& union_models) {
  CoverageReport report;
  report.reference_model = reference;
  report.union_models = union_models;
  std::sort(report.union_models.begin(), report.union_models.end());
  report.union_models.erase(std::unique(report.union_models.begin(), report.union_models.end()),
                            report.union_models.end());

  std::size_t ref_row = matrix.model_index(reference);
  std::vector<std::size_t> union_rows;
  for (const auto& id : report.union_models) union_rows.push_back(matrix.model_index(id));

  std::size_t ref_correct = 0, ref_incorrect = 0;
  std::size_t covered_correct = 0, covered_incorrect = 0, union_covered = 0;
  for (std::size_t i = 0; i < matrix.num_instructions(); ++i) {
    bool union_has = false;
    for (std::size_t row : union_rows) {
      if (matrix.cell(row, i)) {
        union_has = true;
        break;
      }
    }
    if (union_has) ++union_covered;
    if (matrix.cell(ref_row, i)) {
      ++ref_correct;
      if (union_has) ++covered_correct;
    } else {
      ++ref_incorrect;
      if (union_has) ++covered_incorrect;
    }
  }

  report.vacuous_correct = ref_correct == 0;
  report.vacuous_incorrect = ref_incorrect == 0;
  report.covered_correct_fraction =
      report.vacuous_correct ? 1.0
                             : static_cast<double>(covered_correct) / static_cast<double>(ref_correct);
  report.covered_incorrect_fraction =
      report.vacuous_incorrect
          ? 1.0
          : static_cast<double>(covered_incorrect) / static_cast<double>(ref_incorrect);

  double n = static_cast<double>(matrix.num_instructions());
  double oracle_union = n == 0.0 ? 0.0 : static_cast<double>(union_covered) / n;
  double ref_accuracy = n == 0.0 ? 0.0 : static_cast<double>(ref_correct) / n;
  report.potential_gain = oracle_union - ref_accuracy;
  return report;
}

std::vector<ReleaseEvent> simulate_release(const std::vector<ModelRecord>& release_order,
                                           const EvalSet& evals,
                                           const CorrectnessMatrix& full_matrix,
                                           const CoreTaskSet& core, const ScorerParams& scorer,
                                           const std::vector<Instruction>& test_instructions,
                                           const RouteOptions& opts) {
  if (release_order.empty()) throw DataError("release simulation: empty stream");

  std::vector<std::string> test_ids;
  test_ids.reserve(test_instructions.size());
  for (const auto& ins : test_instructions) test_ids.push_back(ins.id);
  CorrectnessMatrix test_matrix = full_matrix.restrict_instructions(test_ids);

  std::vector<ReleaseEvent> events;
  Zoo zoo;
  std::map<std::string, double> history_scores;
  for (std::size_t step = 0; step < release_order.size(); ++step) {
    try {
      ModelRecord newcomer = release_order[step];
      newcomer.release_index = static_cast<int>(step);
      CapabilityRepresentation rep = run_aptitude_test(newcomer.model_id, evals, core);
      history_scores[newcomer.model_id] =
          full_matrix.model_accuracy(full_matrix.model_index(newcomer.model_id));
      zoo = update_zoo_incremental(zoo, newcomer, rep, history_scores);

      RoutingAssignment assignment = route_all(scorer, zoo, test_instructions, opts);

      ReleaseEvent ev;
      ev.step = static_cast<int>(step) + 1;
      ev.model_id = newcomer.model_id;
      ev.zoo_after = zoo.member_ids();

      std::size_t routed = 0, oracle = 0;
      for (const auto& d : assignment.decisions) {
        std::size_t col = test_matrix.instruction_index(d.instruction_id);
        if (test_matrix.cell(test_matrix.model_index(d.chosen_model), col)) ++routed;
        for (const auto& id : ev.zoo_after) {
          if (test_matrix.cell(test_matrix.model_index(id), col)) {
            ++oracle;
            break;
          }
        }
      }
      double n = static_cast<double>(assignment.decisions.size());
      ev.routed_accuracy = n == 0.0 ? 0.0 : 100.0 * static_cast<double>(routed) / n;
      ev.oracle_accuracy = n == 0.0 ? 0.0 : 100.0 * static_cast<double>(oracle) / n;
      double member_sum = 0.0;
      for (const auto& id : ev.zoo_after)
        member_sum += test_matrix.model_accuracy(test_matrix.model_index(id));
      ev.random_accuracy = 100.0 * member_sum / static_cast<double>(ev.zoo_after.size());
      events.push_back(std::move(ev));
    } catch (const DataError& e) {
      throw DataError("release step " + std::to_string(step + 1) + ": " + e.what());
    }
  }
  return events;
}

std::string render_bench_markdown(const BenchReport& report) {
  std::vector<std::string> datasets;
  for (const auto& [name, v] : report.per_dataset_accuracy) datasets.push_back(name);

  std::ostringstream out;
  out << "| Method |";
  for (const auto& d : datasets) out << ' ' << d << " |";
  out << " Mean |\n";
  out << "|---|";
  for (std::size_t i = 0; i < datasets.size(); ++i) out << "---|";
  out << "---|\n";

  out << "| routed |";
  for (const auto& d : datasets) out << ' ' << format_cell(report.per_dataset_accuracy.at(d)) << " |";
  out << ' ' << format_cell(report.mean) << " |\n";

  auto mean_only_row = [&](const std::string& label, double value) {
    out << "| " << label << " |";
    for (std::size_t i = 0; i < datasets.size(); ++i) out << " \xE2\x80\x94 |";
    out << ' ' << format_cell(value) << " |\n";
  };
  mean_only_row("random", report.random_baseline);
  mean_only_row("best single (" + report.best_single_model + ")", report.best_single);
  mean_only_row("oracle", report.oracle);
  for (const auto& [id, acc] : report.per_model) mean_only_row("model " + id, acc);
  return out.str();
}

std::string render_coverage_markdown(const CoverageReport& report) {
  std::ostringstream out;
  out << "| Quantity | Value |\n|---|---|\n";
  out << "| reference model | " << report.reference_model << " |\n";
  std::string unions;
  for (std::size_t i = 0; i < report.union_models.size(); ++i) {
    if (i > 0) unions += ", ";
    unions += report.union_models[i];
  }
  out << "| union models | " << unions << " |\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", report.covered_correct_fraction);
  out << "| covered correct fraction | " << buf << " |\n";
  std::snprintf(buf, sizeof(buf), "%.4f", report.covered_incorrect_fraction);
  out << "| covered incorrect fraction | " << buf << " |\n";
  std::snprintf(buf, sizeof(buf), "%+.4f", report.potential_gain);
  out << "| potential gain | " << buf << " |\n";
  return out.str();
}

std::string render_timeline_markdown(const std::vector<ReleaseEvent>& events) {
  std::ostringstream out;
  out << "| Step | Newcomer | Zoo size | Routed | Random | Oracle |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& ev : events) {
    out << "| " << ev.step << " | " << ev.model_id << " | " << ev.zoo_after.size() << " | "
        << format_cell(ev.routed_accuracy) << " | " << format_cell(ev.random_accuracy) << " | "
        << format_cell(ev.oracle_accuracy) << " |\n";
  }
  return out.str();
}

namespace {

json bench_report_to_json(const BenchReport& r) {
  json baselines;
  baselines["random"] = r.random_baseline;
  baselines["best_single"] = {{"model_id", r.best_single_model}, {"percent", r.best_single}};
  baselines["oracle"] = r.oracle;
  baselines["per_model"] = r.per_model;
  json j;
  j["per_dataset_accuracy"] = r.per_dataset_accuracy;
  j["mean"] = r.mean;
  j["baselines"] = baselines;
  return j;
}

json release_event_to_json(const ReleaseEvent& ev) {
  json j;
  j["step"] = ev.step;
  j["model_id"] = ev.model_id;
  j["zoo_after"] = ev.zoo_after;
  j["routed_accuracy"] = ev.routed_accuracy;
  j["oracle_accuracy"] = ev.oracle_accuracy;
  j["random_accuracy"] = ev.random_accuracy;
  return j;
}

}  // namespace

BenchReport bench_report_from_json_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path + ": malformed bench report: " + e.what());
  }
  BenchReport r;
  for (const auto& [name, v] : j.at("per_dataset_accuracy").items())
    r.per_dataset_accuracy[name] = v.get<double>();
  r.mean = j.at("mean").get<double>();
  const json& b = j.at("baselines");
  r.random_baseline = b.at("random").get<double>();
  r.best_single_model = b.at("best_single").at("model_id").get<std::string>();
  r.best_single = b.at("best_single").at("percent").get<double>();
  r.oracle = b.at("oracle").get<double>();
  for (const auto& [id, v] : b.at("per_model").items()) r.per_model[id] = v.get<double>();
  return r;
}

void write_bench_report_json(const BenchReport& report, const std::string& path) {
  write_file(path, bench_report_to_json(report).dump(2) + "\n");
}

void write_coverage_report_json(const CoverageReport& report, const std::string& path) {
  json j;
  j["reference_model"] = report.reference_model;
  j["union_models"] = report.union_models;
  j["covered_correct_fraction"] = report.covered_correct_fraction;
  j["covered_incorrect_fraction"] = report.covered_incorrect_fraction;
  j["potential_gain"] = report.potential_gain;
  j["vacuous_correct"] = report.vacuous_correct;
  j["vacuous_incorrect"] = report.vacuous_incorrect;
  write_file(path, j.dump(2) + "\n");
}

CoverageReport coverage_report_from_json_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path + ": malformed coverage report: " + e.what());
  }
  CoverageReport r;
  r.reference_model = j.at("reference_model").get<std::string>();
  r.union_models = j.at("union_models").get<std::vector<std::string>>();
  r.covered_correct_fraction = j.at("covered_correct_fraction").get<double>();
  r.covered_incorrect_fraction = j.at("covered_incorrect_fraction").get<double>();
  r.potential_gain = j.at("potential_gain").get<double>();
  r.vacuous_correct = j.value("vacuous_correct", false);
  r.vacuous_incorrect = j.value("vacuous_incorrect", false);
  return r;
}

std::vector<ReleaseEvent> read_timeline_jsonl(const std::string& path) {
  std::vector<ReleaseEvent> events;
  for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    try {
      json j = json::parse(line);
      ReleaseEvent ev;
      ev.step = j.at("step").get<int>();
      ev.model_id = j.at("model_id").get<std::string>();
      ev.zoo_after = j.at("zoo_after").get<std::vector<std::string>>();
      ev.routed_accuracy = j.at("routed_accuracy").get<double>();
      ev.oracle_accuracy = j.at("oracle_accuracy").get<double>();
      ev.random_accuracy = j.value("random_accuracy", 0.0);
      events.push_back(std::move(ev));
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed release event: " +
                      e.what());
    }
  });
  return events;
}

void write_timeline_jsonl(const std::vector<ReleaseEvent>& events, const std::string& path) {
  std::ostringstream out;
  for (const auto& ev : events) out << release_event_to_json(ev).dump() << '\n';
  write_file(path, out.str());
}

}  // namespace caproute
