#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "caproute/errors.hpp"
#include "caproute/sampling.hpp"
#include "caproute/synth.hpp"
#include "caproute/zoo.hpp"
#include "test_util.hpp"

using namespace caproute;
using namespace caproute::testing;

namespace {

double spearman(std::vector<double> xs, std::vector<double> ys) {
  auto rank = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
      i = j + 1;
    }
    return r;
  };
  auto rx = rank(xs), ry = rank(ys);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= rx.size();
  my /= ry.size();
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  return num / std::sqrt(dx * dy);
}

/// The committed default world shape (seeds and sizes from configs/default.cfg).
WorldConfig default_world() {
  WorldConfig wc;
  wc.num_models = 8;
  wc.num_categories = 12;
  wc.subtopics_per_category = 5;
  wc.num_train = 2000;
  wc.num_test = 500;
  wc.mc_fraction = 0.5;
  wc.num_options = 4;
  wc.skill_sharpness = 1.0;
  wc.difficulty_spread = 0.5;
  wc.seed = 42;
  return wc;
}

}  // namespace

TEST_CASE("synth: single perfect-skill model answers everything") {
  WorldConfig wc;
  wc.num_models = 1;
  wc.num_categories = 2;
  wc.num_train = 40;
  wc.num_test = 10;
  wc.perfect_skills = true;
  wc.seed = 3;
  World world = generate_world(wc);
  for (std::size_t i = 0; i < world.truth.matrix.num_instructions(); ++i)
    REQUIRE(world.truth.matrix.cell(0, i));
}

TEST_CASE("synth: identical config and seed give byte-identical worlds") {
  WorldConfig wc;
  wc.num_models = 3;
  wc.num_categories = 3;
  wc.num_train = 90;
  wc.num_test = 30;
  wc.seed = 12;
  TempDir a, b;
  write_world(generate_world(wc), a.str());
  write_world(generate_world(wc), b.str());
  for (const char* f : {"instructions.jsonl", "evals.jsonl", "truth.json"})
    CHECK(read_text(a.file(f)) == read_text(b.file(f)));
}

TEST_CASE("synth: per-category accuracy recount matches skills and difficulties") {
  WorldConfig wc;
  wc.num_models = 4;
  wc.num_categories = 5;
  wc.num_train = 250;
  wc.num_test = 50;
  wc.seed = 14;
  World world = generate_world(wc);
  for (std::size_t m = 0; m < world.truth.model_ids.size(); ++m) {
    for (int c = 0; c < wc.num_categories; ++c) {
      std::size_t total = 0, correct = 0, expected = 0;
      for (const auto& ins : world.store.items()) {
        if (world.truth.category_of.at(ins.id) != c) continue;
        ++total;
        if (world.truth.matrix.cell(m, world.truth.matrix.instruction_index(ins.id))) ++correct;
        if (world.truth.difficulties.at(ins.id) <=
            world.truth.skills[m][static_cast<std::size_t>(c)])
          ++expected;
      }
      REQUIRE(total > 0);
      REQUIRE(correct == expected);
    }
  }
}

TEST_CASE("synth: instruction universe is independent of the model count") {
  WorldConfig wc;
  wc.num_models = 4;
  wc.num_categories = 4;
  wc.num_train = 200;
  wc.num_test = 40;
  wc.seed = 33;
  World small = generate_world(wc);
  wc.num_models = 11;
  World big = generate_world(wc);
  TempDir a, b;
  write_instructions_jsonl(small.store, a.file("i.jsonl"));
  write_instructions_jsonl(big.store, b.file("i.jsonl"));
  CHECK(read_text(a.file("i.jsonl")) == read_text(b.file("i.jsonl")));
  CHECK(small.truth.difficulties == big.truth.difficulties);
}

TEST_CASE("synth: multiple-choice instructions carry every rotation for every model") {
  WorldConfig wc;
  wc.num_models = 2;
  wc.num_categories = 2;
  wc.num_train = 60;
  wc.num_test = 0;
  wc.mc_fraction = 1.0;
  wc.num_options = 4;
  wc.seed = 44;
  World world = generate_world(wc);
  for (const auto& ins : world.store.items()) {
    REQUIRE(ins.is_multiple_choice());
    for (const auto& model : world.truth.model_ids)
      for (int r = 0; r < 4; ++r) REQUIRE(world.evals.lookup(model, ins.id, r).has_value());
  }
}

TEST_CASE("synth: rotation correctness is content-anchored, so refinement flips nothing") {
  WorldConfig wc;
  wc.num_models = 4;
  wc.num_categories = 3;
  wc.num_train = 150;
  wc.num_test = 0;
  wc.mc_fraction = 0.7;
  wc.seed = 45;
  World world = generate_world(wc);
  CorrectnessMatrix refined =
      circle_test_refine(world.truth.matrix, world.evals, world.store, 0.25);
  for (std::size_t m = 0; m < refined.num_models(); ++m)
    for (std::size_t i = 0; i < refined.num_instructions(); ++i)
      REQUIRE(refined.cell(m, i) == world.truth.matrix.cell(m, i));
  CHECK(refined.refined());
}

TEST_CASE("synth: dominant model is correct everywhere") {
  WorldConfig wc;
  wc.num_models = 5;
  wc.num_categories = 3;
  wc.num_train = 90;
  wc.num_test = 30;
  wc.dominant_model = 2;
  wc.seed = 46;
  World world = generate_world(wc);
  for (std::size_t i = 0; i < world.truth.matrix.num_instructions(); ++i)
    REQUIRE(world.truth.matrix.cell("m002", world.truth.matrix.instruction_ids()[i]));
}

TEST_CASE("synth: infeasible configs are rejected") {
  WorldConfig wc;
  wc.num_models = 0;
  CHECK_THROWS_AS(generate_world(wc), DataError);
  wc = WorldConfig{};
  wc.num_train = 0;
  wc.num_test = 0;
  CHECK_THROWS_AS(generate_world(wc), DataError);
  wc = WorldConfig{};
  wc.mc_fraction = 0.5;
  wc.num_options = 1;
  CHECK_THROWS_AS(generate_world(wc), DataError);
  wc = WorldConfig{};
  wc.dominant_model = 99;
  CHECK_THROWS_AS(generate_world(wc), DataError);
}

TEST_CASE("synth: default world aptitude accuracy tracks latent skill (Spearman > 0.9)") {
  World world = generate_world(default_world());
  CoreTaskSet core = sample_core_tasks(world.store, world.truth.matrix, 50, 20, 1001);

  for (std::size_t m = 0; m < world.truth.model_ids.size(); ++m) {
    CapabilityRepresentation rep =
        run_aptitude_test(world.truth.model_ids[m], world.evals, core);
    // aptitude accuracy per category = mean over that category's core tasks
    std::map<std::string, std::pair<double, int>> by_cat;
    for (const auto& tr : rep.results) {
      std::string cat = tr.task_name.substr(0, tr.task_name.find('/'));
      by_cat[cat].first += tr.accuracy;
      by_cat[cat].second += 1;
    }
    std::vector<double> accuracy, skill;
    for (int c = 0; c < 12; ++c) {
      auto it = by_cat.find(world.truth.category_names[static_cast<std::size_t>(c)]);
      if (it == by_cat.end()) continue;  // category without core tasks
      accuracy.push_back(it->second.first / it->second.second);
      skill.push_back(world.truth.skills[m][static_cast<std::size_t>(c)]);
    }
    REQUIRE(accuracy.size() >= 10);
    CHECK(spearman(accuracy, skill) > 0.9);
  }
}
