#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "caproute/encoder.hpp"
#include "caproute/matrix.hpp"
#include "caproute/sampling.hpp"
#include "caproute/store.hpp"
#include "caproute/zoo.hpp"

namespace caproute {

/// Capability text + instruction text + the inquiry prompt whose positive
/// keyword ("Yes") the head's probability refers to.
struct CapabilityInstruction {
  std::string capability_text;
  std::string instruction_text;
  std::string inquiry_prompt;
};

struct ScorerDims {
  int d_capability = 1024;  // capability encoder output
  int d_instruction = 1024; // instruction encoder output
  int d_joint = 128;        // connector / projection target
  int hidden_units = 64;

  bool operator==(const ScorerDims&) const = default;
};

/// Weights of the routing scorer: a connector aligning capability features
/// into the joint space, an instruction projection, and a tanh scoring head
/// producing the 'Yes' logit.
struct ScorerParams {
  ScorerDims dims;
  uint64_t init_seed = 0;
  std::vector<double> connector;         // d_joint × d_capability, row-major
  std::vector<double> instruction_proj;  // d_joint × d_instruction
  std::vector<double> hidden;            // hidden_units × 2·d_joint
  std::vector<double> hidden_bias;       // hidden_units
  std::vector<double> head;              // hidden_units
  double head_bias = 0.0;

  bool finite() const;
};

/// Same shapes as ScorerParams; accumulation buffer for gradients.
struct ScorerGrads {
  std::vector<double> connector;
  std::vector<double> instruction_proj;
  std::vector<double> hidden;
  std::vector<double> hidden_bias;
  std::vector<double> head;
  double head_bias = 0.0;

  void resize(const ScorerDims& dims);
  void zero();
};

/// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per parameter group.
ScorerParams init_scorer_params(const ScorerDims& dims, uint64_t seed);

/// Pr('Yes' | capability, instruction): logistic of the scoring-head logit.
/// Strictly inside (0,1) for finite params; throws DataError on a non-finite
/// intermediate or an empty inquiry prompt.
double score(const ScorerParams& params, const CapabilityInstruction& ci);

/// Pieces of the forward pass, for callers that reuse projections across
/// many scores. score() composes exactly these, so results are bit-identical.
std::vector<double> project_capability(const ScorerParams& params, const FeatureVector& features);
std::vector<double> project_instruction(const ScorerParams& params, const FeatureVector& features);
double logit_from_projected(const ScorerParams& params, const std::vector<double>& capability_proj,
                            const std::vector<double>& instruction_proj);
double logistic(double logit);

/// -log softmax(logits)[y_pos]; numerically stable.
double cross_entropy_from_logits(const std::vector<double>& logits, int y_pos);

/// A training batch materialized to k capability instructions sharing one
/// capability text (homogeneous), exactly one positive at y_pos.
struct MaterializedBatch {
  std::vector<CapabilityInstruction> items;
  int y_pos = 0;
};

/// In-batch-negative cross-entropy over the k 'Yes' logits, with exact
/// reverse-mode gradients accumulated into `grads` (caller zeroes).
double batch_loss_and_grads(const ScorerParams& params, const MaterializedBatch& batch,
                            ScorerGrads& grads);

enum class TrainStage { connector_only, full };

struct TrainConfig {
  int k = 8;
  TrainStage stage = TrainStage::full;
  double lr_base = 0.05;
  double lr_connector_multiplier = 5.0;  // >= 1
  int epochs = 10;
  uint64_t seed = 0;
  int batches_per_model = 300;
  ScorerDims dims;
  std::string inquiry_prompt =
      "Predict whether the model can handle the instruction by indicating 'Yes' or 'No'.";
  std::vector<double> model_rank_weights;  // aligned with matrix.model_ids(); empty = uniform
};

struct TrainResult {
  ScorerParams params;
  std::vector<double> epoch_mean_loss;
  int skipped_models = 0;
};

/// Plain SGD over homogeneous in-batch-negative batches, reshuffled each
/// epoch. `connector_only` leaves every non-connector parameter untouched;
/// `full` updates everything with lr_base (connector: × multiplier).
/// Continues from `init` when given, otherwise seeds a fresh init.
/// Bit-reproducible for identical (data, config, seed).
TrainResult train(const CorrectnessMatrix& matrix, const InstructionStore& store,
                  const CoreTaskSet& core, const Zoo& zoo, const TrainConfig& config,
                  const ScorerParams* init = nullptr);

/// Versioned binary checkpoint; loading with unexpected dims is an error.
void save_scorer(const ScorerParams& params, const std::string& path);
ScorerParams load_scorer(const std::string& path);

}  // namespace caproute
