#pragma once

#include <map>
#include <string>
#include <vector>

#include "caproute/matrix.hpp"
#include "caproute/router.hpp"
#include "caproute/scorer.hpp"
#include "caproute/store.hpp"
#include "caproute/zoo.hpp"

namespace caproute {

/// Accuracies are percents. The headline mean is the unweighted mean over
/// datasets; baselines follow the same convention.
struct BenchReport {
  std::map<std::string, double> per_dataset_accuracy;  // routed, per dataset
  double mean = 0.0;
  double random_baseline = 0.0;  // arithmetic mean of per-model accuracies
  std::string best_single_model;
  double best_single = 0.0;
  double oracle = 0.0;
  std::map<std::string, double> per_model;  // model → mean accuracy
};

BenchReport evaluate_assignment(const RoutingAssignment& assignment,
                                const CorrectnessMatrix& matrix, const InstructionStore& store);

struct CoverageReport {
  std::string reference_model;
  std::vector<std::string> union_models;
  double covered_correct_fraction = 0.0;    // of ref-correct, union also correct
  double covered_incorrect_fraction = 0.0;  // of ref-incorrect, union correct
  double potential_gain = 0.0;              // oracle(union) - accuracy(ref)
  bool vacuous_correct = false;             // reference has no correct instruction
  bool vacuous_incorrect = false;           // reference has no incorrect instruction
};

/// How much of the reference model's ability the union of other models
/// covers. Vacuous denominators yield fraction 1.0 with the flag set.
CoverageReport coverage_analysis(const CorrectnessMatrix& matrix, const std::string& reference,
                                 const std::vector<std::string>& union_models);

struct ReleaseEvent {
  int step = 0;  // 1-based
  std::string model_id;
  std::vector<std::string> zoo_after;
  double routed_accuracy = 0.0;  // percent over the test set
  double oracle_accuracy = 0.0;
  double random_accuracy = 0.0;
};

/// Stream models into the zoo in release order: aptitude-test the newcomer,
/// keep the top-5 historical performers plus the newcomer, and route the
/// test set with the frozen scorer (no retraining). History score = mean
/// accuracy over all evaluated instructions.
std::vector<ReleaseEvent> simulate_release(const std::vector<ModelRecord>& release_order,
                                           const EvalSet& evals,
                                           const CorrectnessMatrix& full_matrix,
                                           const CoreTaskSet& core, const ScorerParams& scorer,
                                           const std::vector<Instruction>& test_instructions,
                                           const RouteOptions& opts);

std::string render_bench_markdown(const BenchReport& report);
std::string render_coverage_markdown(const CoverageReport& report);
std::string render_timeline_markdown(const std::vector<ReleaseEvent>& events);

BenchReport bench_report_from_json_file(const std::string& path);
void write_bench_report_json(const BenchReport& report, const std::string& path);
void write_coverage_report_json(const CoverageReport& report, const std::string& path);
CoverageReport coverage_report_from_json_file(const std::string& path);
std::vector<ReleaseEvent> read_timeline_jsonl(const std::string& path);
void write_timeline_jsonl(const std::vector<ReleaseEvent>& events, const std::string& path);

}  // namespace caproute
