#include "caproute/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <unordered_map>

#include "caproute/errors.hpp"
#include "caproute/rng.hpp"

namespace caproute {

namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void check_dims(const ScorerDims& d) {
  if (d.d_capability < 64 || d.d_instruction < 64)
    throw DataError("scorer dims: encoder dimensions must be >= 64");
  if (d.d_joint < 1 || d.hidden_units < 1)
    throw DataError("scorer dims: joint/hidden sizes must be positive");
}

/// Feature vector + its nonzero index list, for sparse mat-vec loops.
struct EncodedFeature {
  FeatureVector fv;
  std::vector<uint32_t> nz;

  explicit EncodedFeature(FeatureVector v) : fv(std::move(v)), nz(fv.nonzero_indices()) {}
};

std::vector<double> matvec_sparse(const std::vector<double>& weights, int rows, int cols,
                                  const EncodedFeature& x) {
  std::vector<double> out(static_cast<std::size_t>(rows), 0.0);
  for (int r = 0; r < rows; ++r) {
    const double* w = weights.data() + static_cast<std::size_t>(r) * cols;
    double acc = 0.0;
    for (uint32_t j : x.nz) acc += w[j] * x.fv.values[j];
    out[static_cast<std::size_t>(r)] = acc;
  }
  return out;
}

struct Forward {
  std::vector<double> v;       // projected instruction
  std::vector<double> hv;      // tanh activations
  double logit = 0.0;
};

Forward forward_from_projected(const ScorerParams& p, const std::vector<double>& u,
                               std::vector<double> v) {
  const int dj = p.dims.d_joint;
  const int h = p.dims.hidden_units;
  Forward f;
  f.v = std::move(v);
  f.hv.resize(static_cast<std::size_t>(h));
  for (int t = 0; t < h; ++t) {
    const double* w = p.hidden.data() + static_cast<std::size_t>(t) * 2 * dj;
    double acc = p.hidden_bias[static_cast<std::size_t>(t)];
    for (int q = 0; q < dj; ++q) acc += w[q] * u[static_cast<std::size_t>(q)];
    for (int q = 0; q < dj; ++q) acc += w[dj + q] * f.v[static_cast<std::size_t>(q)];
    f.hv[static_cast<std::size_t>(t)] = std::tanh(acc);
  }
  f.logit = p.head_bias;
  for (int t = 0; t < h; ++t) f.logit += p.head[static_cast<std::size_t>(t)] * f.hv[static_cast<std::size_t>(t)];
  return f;
}

/// Loss and gradients for one homogeneous encoded batch. Grads accumulate.
double encoded_batch_loss_and_grads(const ScorerParams& p, const EncodedFeature& capability,
                                    const std::vector<const EncodedFeature*>& instructions,
                                    int y_pos, ScorerGrads& g) {
  const int dj = p.dims.d_joint;
  const int h = p.dims.hidden_units;
  const std::size_t k = instructions.size();
  if (k < 2) throw DataError("batch loss: k must be >= 2");
  if (y_pos < 0 || static_cast<std::size_t>(y_pos) >= k)
    throw DataError("batch loss: y_pos out of range");

  std::vector<double> u = matvec_sparse(p.connector, dj, p.dims.d_capability, capability);

  std::vector<Forward> fwd;
  fwd.reserve(k);
  std::vector<double> logits(k);
  for (std::size_t i = 0; i < k; ++i) {
    fwd.push_back(forward_from_projected(
        p, u, matvec_sparse(p.instruction_proj, dj, p.dims.d_instruction, *instructions[i])));
    logits[i] = fwd[i].logit;
    if (!std::isfinite(logits[i])) throw DataError("batch loss: non-finite logit");
  }

  double loss = cross_entropy_from_logits(logits, y_pos);

  // softmax(logits) - one_hot(y_pos)
  double max_logit = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  std::vector<double> dlogit(k);
  for (std::size_t i = 0; i < k; ++i) {
    dlogit[i] = std::exp(logits[i] - max_logit);
    denom += dlogit[i];
  }
  for (std::size_t i = 0; i < k; ++i) dlogit[i] /= denom;
  dlogit[static_cast<std::size_t>(y_pos)] -= 1.0;

  std::vector<double> du_total(static_cast<std::size_t>(dj), 0.0);
  std::vector<double> dpre(static_cast<std::size_t>(h));
  for (std::size_t i = 0; i < k; ++i) {
    const Forward& f = fwd[i];
    double dl = dlogit[i];
    g.head_bias += dl;
    for (int t = 0; t < h; ++t) {
      double hv = f.hv[static_cast<std::size_t>(t)];
      g.head[static_cast<std::size_t>(t)] += dl * hv;
      dpre[static_cast<std::size_t>(t)] = dl * p.head[static_cast<std::size_t>(t)] * (1.0 - hv * hv);
    }
    for (int t = 0; t < h; ++t) {
      double dp = dpre[static_cast<std::size_t>(t)];
      if (dp == 0.0) continue;
      double* gw = g.hidden.data() + static_cast<std::size_t>(t) * 2 * dj;
      for (int q = 0; q < dj; ++q) gw[q] += dp * u[static_cast<std::size_t>(q)];
      for (int q = 0; q < dj; ++q) gw[dj + q] += dp * f.v[static_cast<std::size_t>(q)];
      g.hidden_bias[static_cast<std::size_t>(t)] += dp;
    }
    // dz = hidden^T dpre, split into capability and instruction halves
    std::vector<double> dv(static_cast<std::size_t>(dj), 0.0);
    for (int t = 0; t < h; ++t) {
      double dp = dpre[static_cast<std::size_t>(t)];
      if (dp == 0.0) continue;
      const double* w = p.hidden.data() + static_cast<std::size_t>(t) * 2 * dj;
      for (int q = 0; q < dj; ++q) du_total[static_cast<std::size_t>(q)] += dp * w[q];
      for (int q = 0; q < dj; ++q) dv[static_cast<std::size_t>(q)] += dp * w[dj + q];
    }
    for (int r = 0; r < dj; ++r) {
      double dvr = dv[static_cast<std::size_t>(r)];
      if (dvr == 0.0) continue;
      double* gp = g.instruction_proj.data() + static_cast<std::size_t>(r) * p.dims.d_instruction;
      for (uint32_t j : instructions[i]->nz) gp[j] += dvr * instructions[i]->fv.values[j];
    }
  }
  for (int r = 0; r < dj; ++r) {
    double dur = du_total[static_cast<std::size_t>(r)];
    if (dur == 0.0) continue;
    double* gw = g.connector.data() + static_cast<std::size_t>(r) * p.dims.d_capability;
    for (uint32_t j : capability.nz) gw[j] += dur * capability.fv.values[j];
  }
  return loss;
}

}  // namespace

bool ScorerParams::finite() const {
  return all_finite(connector) && all_finite(instruction_proj) && all_finite(hidden) &&
         all_finite(hidden_bias) && all_finite(head) && std::isfinite(head_bias);
}

void ScorerGrads::resize(const ScorerDims& dims) {
  connector.assign(static_cast<std::size_t>(dims.d_joint) * dims.d_capability, 0.0);
  instruction_proj.assign(static_cast<std::size_t>(dims.d_joint) * dims.d_instruction, 0.0);
  hidden.assign(static_cast<std::size_t>(dims.hidden_units) * 2 * dims.d_joint, 0.0);
  hidden_bias.assign(static_cast<std::size_t>(dims.hidden_units), 0.0);
  head.assign(static_cast<std::size_t>(dims.hidden_units), 0.0);
  head_bias = 0.0;
}

void ScorerGrads::zero() {
  std::fill(connector.begin(), connector.end(), 0.0);
  std::fill(instruction_proj.begin(), instruction_proj.end(), 0.0);
  std::fill(hidden.begin(), hidden.end(), 0.0);
  std::fill(hidden_bias.begin(), hidden_bias.end(), 0.0);
  std::fill(head.begin(), head.end(), 0.0);
  head_bias = 0.0;
}

ScorerParams init_scorer_params(const ScorerDims& dims, uint64_t seed) {
  check_dims(dims);
  ScorerParams p;
  p.dims = dims;
  p.init_seed = seed;
  Rng rng(Rng::derive(seed, "scorer-init"));
  auto fill = [&rng](std::vector<double>& v, std::size_t n, int fan_in) {
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    v.resize(n);
    for (double& x : v) x = (2.0 * rng.uniform01() - 1.0) * bound;
  };
  fill(p.connector, static_cast<std::size_t>(dims.d_joint) * dims.d_capability, dims.d_capability);
  fill(p.instruction_proj, static_cast<std::size_t>(dims.d_joint) * dims.d_instruction,
       dims.d_instruction);
  fill(p.hidden, static_cast<std::size_t>(dims.hidden_units) * 2 * dims.d_joint, 2 * dims.d_joint);
  fill(p.hidden_bias, static_cast<std::size_t>(dims.hidden_units), 2 * dims.d_joint);
  fill(p.head, static_cast<std::size_t>(dims.hidden_units), dims.hidden_units);
  double bound = 1.0 / std::sqrt(static_cast<double>(dims.hidden_units));
  p.head_bias = (2.0 * rng.uniform01() - 1.0) * bound;
  return p;
}

double logistic(double logit) {
  if (logit >= 0.0) return 1.0 / (1.0 + std::exp(-logit));
  double e = std::exp(logit);
  return e / (1.0 + e);
}

std::vector<double> project_capability(const ScorerParams& p, const FeatureVector& features) {
  if (static_cast<int>(features.dim()) != p.dims.d_capability)
    throw DataError("capability feature dimension mismatch");
  EncodedFeature ef(features);
  return matvec_sparse(p.connector, p.dims.d_joint, p.dims.d_capability, ef);
}

std::vector<double> project_instruction(const ScorerParams& p, const FeatureVector& features) {
  if (static_cast<int>(features.dim()) != p.dims.d_instruction)
    throw DataError("instruction feature dimension mismatch");
  EncodedFeature ef(features);
  return matvec_sparse(p.instruction_proj, p.dims.d_joint, p.dims.d_instruction, ef);
}

double logit_from_projected(const ScorerParams& p, const std::vector<double>& capability_proj,
                            const std::vector<double>& instruction_proj) {
  Forward f = forward_from_projected(p, capability_proj, instruction_proj);
  if (!std::isfinite(f.logit)) throw DataError("scorer produced a non-finite logit");
  return f.logit;
}

double score(const ScorerParams& params, const CapabilityInstruction& ci) {
  if (ci.inquiry_prompt.empty()) throw DataError("capability instruction: empty inquiry prompt");
  FeatureVector ec = encode_capability(ci.capability_text, params.dims.d_capability);
  FeatureVector ex = encode_instruction(ci.instruction_text, params.dims.d_instruction);
  double logit = logit_from_projected(params, project_capability(params, ec),
                                      project_instruction(params, ex));
  return logistic(logit);
}

double cross_entropy_from_logits(const std::vector<double>& logits, int y_pos) {
  if (logits.empty()) throw DataError("cross entropy: empty logit vector");
  if (y_pos < 0 || static_cast<std::size_t>(y_pos) >= logits.size())
    throw DataError("cross entropy: y_pos out of range");
  double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - max_logit);
  return max_logit + std::log(sum) - logits[static_cast<std::size_t>(y_pos)];
}

double batch_loss_and_grads(const ScorerParams& params, const MaterializedBatch& batch,
                            ScorerGrads& grads) {
  if (batch.items.size() < 2) throw DataError("batch loss: need k >= 2 items");
  for (const auto& ci : batch.items) {
    if (ci.inquiry_prompt.empty())
      throw DataError("capability instruction: empty inquiry prompt");
    if (ci.capability_text != batch.items.front().capability_text)
      throw DataError("batch loss: batch is not homogeneous in capability text");
  }
  EncodedFeature capability(
      encode_capability(batch.items.front().capability_text, params.dims.d_capability));
  std::vector<EncodedFeature> owned;
  owned.reserve(batch.items.size());
  std::vector<const EncodedFeature*> instructions;
  for (const auto& ci : batch.items) {
    owned.emplace_back(encode_instruction(ci.instruction_text, params.dims.d_instruction));
    instructions.push_back(&owned.back());
  }
  return encoded_batch_loss_and_grads(params, capability, instructions, batch.y_pos, grads);
}

TrainResult train(const CorrectnessMatrix& matrix, const InstructionStore& store,
                  const CoreTaskSet& core, const Zoo& zoo, const TrainConfig& config,
                  const ScorerParams* init) {
  check_dims(config.dims);
  if (config.lr_base <= 0.0) throw DataError("train: lr_base must be > 0");
  if (config.lr_connector_multiplier < 1.0)
    throw DataError("train: lr_connector_multiplier must be >= 1");
  if (config.epochs < 0) throw DataError("train: epochs must be >= 0");

  TrainResult result;
  if (init) {
    if (!(init->dims == config.dims)) throw DataError("train: init params dims mismatch");
    result.params = *init;
  } else {
    result.params = init_scorer_params(config.dims, Rng::derive(config.seed, "init"));
  }

  BatchBuildResult built =
      build_training_batches(matrix, store, core, config.k, config.batches_per_model,
                             config.model_rank_weights, Rng::derive(config.seed, "batch-build"));
  result.skipped_models = built.skipped_models;
  if (built.batches.empty() || config.epochs == 0) return result;

  // Encode each capability text and instruction once; encodings are pure.
  std::map<std::string, EncodedFeature> capability_cache;
  std::unordered_map<std::string, EncodedFeature> instruction_cache;
  for (const auto& batch : built.batches) {
    if (!capability_cache.count(batch.model_id)) {
      auto it = zoo.representations.find(batch.model_id);
      if (it == zoo.representations.end())
        throw DataError("train: model '" + batch.model_id + "' has no capability representation");
      capability_cache.emplace(
          batch.model_id,
          EncodedFeature(encode_capability(render_capability_text(it->second),
                                           config.dims.d_capability)));
    }
    auto encode_ins = [&](const std::string& id) {
      if (!instruction_cache.count(id))
        instruction_cache.emplace(
            id, EncodedFeature(encode_instruction(store.get(id).text, config.dims.d_instruction)));
    };
    encode_ins(batch.positive);
    for (const auto& id : batch.negatives) encode_ins(id);
  }

  struct Prepared {
    const EncodedFeature* capability;
    std::vector<const EncodedFeature*> instructions;
    int y_pos;
  };
  std::vector<Prepared> prepared;
  prepared.reserve(built.batches.size());
  for (const auto& batch : built.batches) {
    Prepared pb;
    pb.capability = &capability_cache.at(batch.model_id);
    pb.y_pos = batch.y_pos;
    std::size_t neg_at = 0;
    for (int pos = 0; pos < config.k; ++pos) {
      if (pos == batch.y_pos)
        pb.instructions.push_back(&instruction_cache.at(batch.positive));
      else
        pb.instructions.push_back(&instruction_cache.at(batch.negatives[neg_at++]));
    }
    prepared.push_back(std::move(pb));
  }

  const bool connector_only = config.stage == TrainStage::connector_only;
  const double lr_connector = config.lr_base * config.lr_connector_multiplier;
  ScorerGrads grads;
  grads.resize(config.dims);

  std::vector<std::size_t> order(prepared.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng(Rng::derive(Rng::derive(config.seed, "epoch"), static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t bi = 0; bi < order.size(); ++bi) {
      const Prepared& pb = prepared[order[bi]];
      grads.zero();
      double loss = encoded_batch_loss_and_grads(result.params, *pb.capability, pb.instructions,
                                                 pb.y_pos, grads);
      if (!std::isfinite(loss))
        throw DataError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(bi));
      loss_sum += loss;

      auto axpy = [](std::vector<double>& theta, const std::vector<double>& g, double lr) {
        for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * g[i];
      };
      axpy(result.params.connector, grads.connector, lr_connector);
      if (!connector_only) {
        axpy(result.params.instruction_proj, grads.instruction_proj, config.lr_base);
        axpy(result.params.hidden, grads.hidden, config.lr_base);
        axpy(result.params.hidden_bias, grads.hidden_bias, config.lr_base);
        axpy(result.params.head, grads.head, config.lr_base);
        result.params.head_bias -= config.lr_base * grads.head_bias;
      }
    }
    result.epoch_mean_loss.push_back(loss_sum / static_cast<double>(order.size()));
  }
  return result;
}

namespace {

constexpr char kMagic[8] = {'C', 'A', 'P', 'S', 'C', 'O', 'R', '1'};
constexpr uint32_t kFormatVersion = 1;

void put_u32(std::ofstream& out, uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::ofstream& out, uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
void put_doubles(std::ofstream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

uint32_t get_u32(std::ifstream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
uint64_t get_u64(std::ifstream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
void get_doubles(std::ifstream& in, std::vector<double>& v, std::size_t n) {
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

}  // namespace

void save_scorer(const ScorerParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<uint32_t>(params.dims.d_capability));
  put_u32(out, static_cast<uint32_t>(params.dims.d_instruction));
  put_u32(out, static_cast<uint32_t>(params.dims.d_joint));
  put_u32(out, static_cast<uint32_t>(params.dims.hidden_units));
  put_u64(out, params.init_seed);
  put_doubles(out, params.connector);
  put_doubles(out, params.instruction_proj);
  put_doubles(out, params.hidden);
  put_doubles(out, params.hidden_bias);
  put_doubles(out, params.head);
  out.write(reinterpret_cast<const char*>(&params.head_bias), sizeof(double));
  if (!out) throw DataError("checkpoint write failed: " + path);
}

ScorerParams load_scorer(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError(path + ": not a scorer checkpoint");
  uint32_t version = get_u32(in);
  if (version != kFormatVersion)
    throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));
  ScorerParams p;
  p.dims.d_capability = static_cast<int>(get_u32(in));
  p.dims.d_instruction = static_cast<int>(get_u32(in));
  p.dims.d_joint = static_cast<int>(get_u32(in));
  p.dims.hidden_units = static_cast<int>(get_u32(in));
  p.init_seed = get_u64(in);
  check_dims(p.dims);
  get_doubles(in, p.connector, static_cast<std::size_t>(p.dims.d_joint) * p.dims.d_capability);
  get_doubles(in, p.instruction_proj,
              static_cast<std::size_t>(p.dims.d_joint) * p.dims.d_instruction);
  get_doubles(in, p.hidden, static_cast<std::size_t>(p.dims.hidden_units) * 2 * p.dims.d_joint);
  get_doubles(in, p.hidden_bias, static_cast<std::size_t>(p.dims.hidden_units));
  get_doubles(in, p.head, static_cast<std::size_t>(p.dims.hidden_units));
  in.read(reinterpret_cast<char*>(&p.head_bias), sizeof(double));
  if (!in) throw DataError(path + ": truncated checkpoint");
  return p;
}

}  // namespace caproute
