#include "caproute/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "caproute/errors.hpp"
#include "caproute/rng.hpp"
#include "file_util.hpp"

using nlohmann::json;

namespace caproute {

namespace {

// Syllable inventory for pseudo-word generation. Category-specific word
// pools share syllables, so character n-grams carry a learnable but
// imperfect category signal.
constexpr const char* kSyllables[] = {
    "ba", "ce", "di", "fo", "gu", "ha", "je", "ki", "lo", "mu", "na", "pe",
    "qui", "ro", "su", "ta", "ve", "wi", "xo", "yu", "zan", "bel", "cor", "dun",
    "fer", "gil", "hom", "jat", "kel", "lin", "mor", "nus", "pol", "rag", "sem",
    "tor", "val", "wen", "yor", "zil",
};
constexpr std::size_t kNumSyllables = sizeof(kSyllables) / sizeof(kSyllables[0]);

std::string make_word(Rng& rng, int syllables) {
  std::string w;
  for (int s = 0; s < syllables; ++s) w += kSyllables[rng.uniform_index(kNumSyllables)];
  return w;
}

std::vector<std::string> make_pool(Rng& rng, int count, int syllables) {
  std::vector<std::string> pool;
  pool.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) pool.push_back(make_word(rng, syllables));
  return pool;
}

std::string zero_pad(int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*d", width, value);
  return buf;
}

void validate(const WorldConfig& c) {
  if (c.num_models < 1) throw DataError("world config: num_models must be >= 1");
  if (c.num_categories < 1) throw DataError("world config: num_categories must be >= 1");
  if (c.subtopics_per_category < 1)
    throw DataError("world config: subtopics_per_category must be >= 1");
  if (c.num_train < 0 || c.num_test < 0)
    throw DataError("world config: instruction counts must be >= 0");
  if (c.num_train + c.num_test < 1) throw DataError("world config: empty world");
  if (c.mc_fraction < 0.0 || c.mc_fraction > 1.0)
    throw DataError("world config: mc_fraction must lie in [0, 1]");
  if (c.mc_fraction > 0.0 && c.num_options < 2)
    throw DataError("world config: multiple choice needs num_options >= 2");
  if (c.skill_sharpness <= 0.0) throw DataError("world config: skill_sharpness must be > 0");
  if (c.difficulty_spread < 0.0) throw DataError("world config: difficulty_spread must be >= 0");
  if (c.dominant_model >= c.num_models)
    throw DataError("world config: dominant_model out of range");
}

}  // namespace

World generate_world(const WorldConfig& config) {
  validate(config);
  World world;
  WorldTruth& truth = world.truth;

  // Lexicon streams are independent of num_models so worlds sharing a seed
  // share their instruction universe across different model counts.
  std::vector<std::vector<std::string>> category_pools;
  std::vector<std::vector<std::vector<std::string>>> subtopic_pools;
  std::vector<std::vector<std::string>> subtopic_names(
      static_cast<std::size_t>(config.num_categories));
  Rng filler_rng(Rng::derive(config.seed, "lex-filler"));
  std::vector<std::string> filler_pool = make_pool(filler_rng, 30, 2);

  for (int c = 0; c < config.num_categories; ++c) {
    Rng rng(Rng::derive(config.seed, "lex-cat-" + std::to_string(c)));
    truth.category_names.push_back(make_word(rng, 3) + zero_pad(c, 2));
    category_pools.push_back(make_pool(rng, 24, 3));
    std::vector<std::vector<std::string>> subs;
    for (int s = 0; s < config.subtopics_per_category; ++s) {
      subtopic_names[static_cast<std::size_t>(c)].push_back(make_word(rng, 2) + zero_pad(s, 2));
      subs.push_back(make_pool(rng, 8, 3));
    }
    subtopic_pools.push_back(std::move(subs));
  }

  // Latent skills, one independent stream per (model, category) pair.
  for (int m = 0; m < config.num_models; ++m)
    truth.model_ids.push_back("m" + zero_pad(m, 3));
  truth.skills.resize(static_cast<std::size_t>(config.num_models));
  for (int m = 0; m < config.num_models; ++m) {
    auto& row = truth.skills[static_cast<std::size_t>(m)];
    row.resize(static_cast<std::size_t>(config.num_categories));
    for (int c = 0; c < config.num_categories; ++c) {
      if (config.perfect_skills || m == config.dominant_model) {
        row[static_cast<std::size_t>(c)] = 1.0;
        continue;
      }
      Rng rng(Rng::derive(config.seed,
                          "skill-" + truth.model_ids[static_cast<std::size_t>(m)] + "-" +
                              std::to_string(c)));
      row[static_cast<std::size_t>(c)] = std::pow(rng.uniform01(), 1.0 / config.skill_sharpness);
    }
  }

  // Instructions: dealt round-robin over categories, then over each
  // category's subtopics, train block first.
  int total = config.num_train + config.num_test;
  std::vector<int> subtopic_counter(static_cast<std::size_t>(config.num_categories), 0);
  for (int i = 0; i < total; ++i) {
    bool is_train = i < config.num_train;
    int within_split = is_train ? i : i - config.num_train;
    int c = within_split % config.num_categories;
    int s = subtopic_counter[static_cast<std::size_t>(c)]++ % config.subtopics_per_category;

    Instruction ins;
    ins.id = "q" + zero_pad(i, 5);
    ins.dataset = truth.category_names[static_cast<std::size_t>(c)];
    ins.task_tags = {truth.category_names[static_cast<std::size_t>(c)],
                     subtopic_names[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)]};
    ins.split = is_train ? Split::train : Split::test;

    Rng rng(Rng::derive(config.seed, "text-" + ins.id));
    std::vector<std::string> words;
    const auto& cat_pool = category_pools[static_cast<std::size_t>(c)];
    const auto& sub_pool = subtopic_pools[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)];
    for (int w = 0; w < 6; ++w) words.push_back(cat_pool[rng.uniform_index(cat_pool.size())]);
    for (int w = 0; w < 2; ++w) words.push_back(sub_pool[rng.uniform_index(sub_pool.size())]);
    for (int w = 0; w < 3; ++w) words.push_back(filler_pool[rng.uniform_index(filler_pool.size())]);
    rng.shuffle(words);
    std::string text;
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (w > 0) text += ' ';
      text += words[w];
    }
    ins.text = text;

    Rng diff_rng(Rng::derive(config.seed, "diff-" + ins.id));
    double d = 0.5 + config.difficulty_spread * (diff_rng.uniform01() - 0.5);
    truth.difficulties[ins.id] = std::clamp(d, 0.0, 1.0);
    truth.category_of[ins.id] = c;

    Rng mc_rng(Rng::derive(config.seed, "mc-" + ins.id));
    if (mc_rng.uniform01() < config.mc_fraction) {
      std::vector<std::string> options;
      for (int o = 0; o < config.num_options; ++o)
        options.push_back("option " + make_word(mc_rng, 2) + " " + std::to_string(o));
      std::size_t answer_at = mc_rng.uniform_index(options.size());
      ins.answer = options[answer_at];
      ins.options = std::move(options);
    } else {
      ins.answer = "answer " + make_word(mc_rng, 2);
    }
    world.store.add(std::move(ins));
  }

  // Eval records: correctness follows the threshold rule at every rotation.
  // A model that does not know the answer emits a fixed wrong *content*, so
  // no rotation can turn it lucky.
  for (int m = 0; m < config.num_models; ++m) {
    const std::string& model_id = truth.model_ids[static_cast<std::size_t>(m)];
    for (const auto& ins : world.store.items()) {
      int c = truth.category_of.at(ins.id);
      bool knows = truth.skills[static_cast<std::size_t>(m)][static_cast<std::size_t>(c)] >=
                   truth.difficulties.at(ins.id);
      std::string output;
      if (knows) {
        output = ins.answer;
      } else if (ins.options) {
        std::size_t answer_at = static_cast<std::size_t>(
            std::find(ins.options->begin(), ins.options->end(), ins.answer) -
            ins.options->begin());
        output = (*ins.options)[(answer_at + 1) % ins.options->size()];
      } else {
        output = "wrong answer";
      }
      int rotations = ins.options ? static_cast<int>(ins.options->size()) : 1;
      for (int r = 0; r < rotations; ++r)
        world.evals.add({model_id, ins.id, output, knows, r});
    }
  }

  truth.matrix = build_correctness_matrix(world.evals);
  return world;
}

void write_world(const World& world, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_instructions_jsonl(world.store, dir + "/instructions.jsonl");
  write_evals_jsonl(world.evals, dir + "/evals.jsonl");

  json j;
  j["model_ids"] = world.truth.model_ids;
  j["category_names"] = world.truth.category_names;
  j["skills"] = world.truth.skills;
  j["difficulties"] = world.truth.difficulties;
  j["category_of"] = world.truth.category_of;
  write_file(dir + "/truth.json", j.dump(2) + "\n");
}

}  // namespace caproute
