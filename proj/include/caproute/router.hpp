#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "caproute/matrix.hpp"
#include "caproute/scorer.hpp"
#include "caproute/store.hpp"
#include "caproute/zoo.hpp"

namespace caproute {

struct RoutingDecision {
  std::string instruction_id;
  std::string chosen_model;
  std::map<std::string, double> scores;  // model → perturbation-averaged probability
  std::vector<uint64_t> perturbation_seeds;
};

struct RoutingAssignment {
  std::vector<RoutingDecision> decisions;  // one per test instruction, input order
};

struct RouteOptions {
  std::string inquiry_prompt =
      "Predict whether the model can handle the instruction by indicating 'Yes' or 'No'.";
  int num_perturbations = 2;
  uint64_t seed = 0;
  int workers = 1;
};

/// Score every member on the original capability rendering plus
/// `num_perturbations` random task-order permutations, average, and pick the
/// argmax (ties break to the lexicographically smallest model id).
RoutingDecision route_one(const ScorerParams& params, const Zoo& zoo,
                          const Instruction& instruction, const RouteOptions& opts);

/// route_one per instruction with a per-instruction seed derived as
/// seed XOR fnv1a64(instruction_id), so results are independent of worker
/// count and scheduling.
RoutingAssignment route_all(const ScorerParams& params, const Zoo& zoo,
                            const std::vector<Instruction>& instructions,
                            const RouteOptions& opts);

/// Ground-truth-optimal assignment over the matrix: the lexicographically
/// first correct model when one exists, else the lexicographically first
/// model overall.
RoutingAssignment oracle_route(const CorrectnessMatrix& matrix,
                               const std::vector<std::string>& zoo_model_ids);

RoutingAssignment read_assignment_jsonl(const std::string& path);
void write_assignment_jsonl(const RoutingAssignment& assignment, const std::string& path);

}  // namespace caproute
