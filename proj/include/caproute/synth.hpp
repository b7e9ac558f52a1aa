#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "caproute/matrix.hpp"
#include "caproute/store.hpp"

namespace caproute {

/// Synthetic-world shape. Latent per-(model, category) skills and
/// per-instruction difficulties induce a deterministic correctness matrix:
/// model m answers instruction i correctly iff skill(m, cat(i)) >= difficulty(i).
struct WorldConfig {
  int num_models = 8;
  int num_categories = 12;
  int subtopics_per_category = 5;  // task tags per category; tasks = categories × subtopics
  int num_train = 2000;            // dealt round-robin over categories
  int num_test = 500;
  double mc_fraction = 0.5;  // share of multiple-choice instructions
  int num_options = 4;
  double skill_sharpness = 1.0;    // skill = u^(1/sharpness), u uniform
  double difficulty_spread = 1.0;  // 0 → all 0.5, 1 → uniform [0,1]
  bool perfect_skills = false;     // sharpness → ∞ endpoint: every skill 1.0
  int dominant_model = -1;         // index of a model with skill 1.0 everywhere
  uint64_t seed = 0;
};

struct WorldTruth {
  std::vector<std::string> model_ids;
  std::vector<std::string> category_names;
  std::vector<std::vector<double>> skills;    // model × category
  std::map<std::string, double> difficulties; // instruction id → difficulty
  std::map<std::string, int> category_of;     // instruction id → category index
  CorrectnessMatrix matrix;                   // equals the threshold rule at every cell
};

struct World {
  InstructionStore store;
  EvalSet evals;
  WorldTruth truth;
};

/// Bit-reproducible per seed. Instruction content, difficulties and splits
/// depend only on (seed, world shape), not on num_models, so worlds sharing
/// a seed share their instruction universe across different model counts.
/// Multiple-choice instructions carry eval records for every option rotation.
World generate_world(const WorldConfig& config);

/// instructions.jsonl, evals.jsonl and truth.json under dir.
void write_world(const World& world, const std::string& dir);

}  // namespace caproute
