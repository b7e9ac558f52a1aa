#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "caproute/matrix.hpp"
#include "caproute/store.hpp"

namespace caproute {

struct CoreTask {
  std::string task_name;
  std::array<std::string, 5> keywords;
  std::vector<std::string> instruction_ids;
};

/// The aptitude-test battery: high-distinguishability tasks, a fixed number
/// of shots each, all drawn from the train split.
struct CoreTaskSet {
  std::vector<CoreTask> tasks;

  bool contains_instruction(const std::string& id) const;
  std::vector<std::string> all_instruction_ids() const;
};

/// Select `num_tasks` task-tag groups ranked by mean distinguishability
/// weight, then draw `shots` instructions per task without replacement with
/// probability proportional to weight (uniform fallback when all remaining
/// weights are zero). Deterministic given seed.
CoreTaskSet sample_core_tasks(const InstructionStore& store, const CorrectnessMatrix& matrix,
                              int num_tasks, int shots, uint64_t seed);

/// One contrastive training batch: a single model's capability profile with
/// one instruction it handles and k-1 it fails.
struct TrainingBatch {
  std::string model_id;
  std::string positive;
  std::vector<std::string> negatives;
  int y_pos = 0;  // position of the positive within the batch order
};

struct BatchBuildResult {
  std::vector<TrainingBatch> batches;
  int skipped_models = 0;
  std::vector<std::string> warnings;
};

/// Homogeneous in-batch negative sampling. Positives come from correct
/// cells and negatives from incorrect cells of the (refined) matrix, both
/// restricted to train-split instructions outside the core set. Models are
/// drawn proportionally to `model_rank_weights` (aligned with
/// matrix.model_ids(); empty means uniform). Models with no usable positive
/// or too few negatives are skipped with a warning.
BatchBuildResult build_training_batches(const CorrectnessMatrix& matrix,
                                        const InstructionStore& store, const CoreTaskSet& core,
                                        int k, int batches_per_model,
                                        const std::vector<double>& model_rank_weights,
                                        uint64_t seed);

CoreTaskSet read_core_tasks_json(const std::string& path);
void write_core_tasks_json(const CoreTaskSet& core, const std::string& path);

}  // namespace caproute
