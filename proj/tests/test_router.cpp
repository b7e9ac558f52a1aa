#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "caproute/errors.hpp"
#include "caproute/rng.hpp"
#include "caproute/router.hpp"
#include "caproute/sampling.hpp"
#include "caproute/scorer.hpp"
#include "caproute/synth.hpp"
#include "caproute/zoo.hpp"
#include "test_util.hpp"

using namespace caproute;
using namespace caproute::testing;

namespace {

ScorerDims small_dims() {
  ScorerDims d;
  d.d_capability = 64;
  d.d_instruction = 64;
  d.d_joint = 16;
  d.hidden_units = 8;
  return d;
}

ScorerParams zero_params() {
  ScorerParams p = init_scorer_params(small_dims(), 1);
  std::fill(p.connector.begin(), p.connector.end(), 0.0);
  std::fill(p.instruction_proj.begin(), p.instruction_proj.end(), 0.0);
  std::fill(p.hidden.begin(), p.hidden.end(), 0.0);
  std::fill(p.hidden_bias.begin(), p.hidden_bias.end(), 0.0);
  std::fill(p.head.begin(), p.head.end(), 0.0);
  p.head_bias = 0.0;
  return p;
}

CapabilityRepresentation rep_with_profile(const std::string& id, const std::vector<int>& pcts) {
  CapabilityRepresentation rep;
  rep.model_id = id;
  for (std::size_t t = 0; t < pcts.size(); ++t) {
    TaskResult tr;
    tr.task_name = "task" + std::to_string(t);
    tr.keywords = {"kw" + std::to_string(t), "a", "b", "c", "d"};
    tr.accuracy = pcts[t] / 100.0;
    rep.results.push_back(tr);
  }
  return rep;
}

Zoo make_zoo(const std::vector<std::string>& ids) {
  Zoo zoo;
  Rng rng(5);
  for (const auto& id : ids) {
    ModelRecord rec;
    rec.model_id = id;
    zoo.members.push_back(rec);
    std::vector<int> pcts;
    for (int t = 0; t < 6; ++t) pcts.push_back(static_cast<int>(rng.uniform_index(21)) * 5);
    zoo.representations[id] = rep_with_profile(id, pcts);
  }
  return zoo;
}

Instruction instruction_with_text(const std::string& id, const std::string& text) {
  Instruction ins = make_instruction(id, "t", Split::test);
  ins.text = text;
  return ins;
}

}  // namespace

TEST_CASE("route_one: single-member zoo always picks that member") {
  Zoo zoo = make_zoo({"only"});
  ScorerParams p = init_scorer_params(small_dims(), 2);
  RouteOptions opts;
  RoutingDecision d = route_one(p, zoo, instruction_with_text("q", "anything"), opts);
  CHECK(d.chosen_model == "only");
  CHECK(d.scores.size() == 1);
}

TEST_CASE("route_one: all-zero params tie-break to the lexicographically smallest id") {
  Zoo zoo = make_zoo({"mc", "ma", "mb"});
  ScorerParams p = zero_params();
  RouteOptions opts;
  RoutingDecision d = route_one(p, zoo, instruction_with_text("q", "text"), opts);
  CHECK(d.chosen_model == "ma");
  for (const auto& [id, s] : d.scores) CHECK(s == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("route_one: empty zoo is an error") {
  Zoo zoo;
  ScorerParams p = zero_params();
  RouteOptions opts;
  CHECK_THROWS_AS(route_one(p, zoo, instruction_with_text("q", "t"), opts), DataError);
}

TEST_CASE("route_one: perturbation averaging matches the unperturbed score to 1e-12") {
  Zoo zoo = make_zoo({"m1", "m2", "m3"});
  ScorerParams p = init_scorer_params(small_dims(), 9);
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    Instruction ins =
        instruction_with_text("q" + std::to_string(trial),
                              "instruction body " + std::to_string(rng.next_u64() % 100000));
    RouteOptions none;
    none.num_perturbations = 0;
    none.seed = trial;
    RouteOptions two;
    two.num_perturbations = 2;
    two.seed = trial;
    RoutingDecision base = route_one(p, zoo, ins, none);
    RoutingDecision avg = route_one(p, zoo, ins, two);
    REQUIRE(avg.perturbation_seeds.size() == 2);
    for (const auto& [id, s] : base.scores)
      REQUIRE(std::abs(s - avg.scores.at(id)) < 1e-12);
    REQUIRE(base.chosen_model == avg.chosen_model);
  }
}

TEST_CASE("route_one: invariant to zoo member order and duplicate members") {
  Zoo zoo = make_zoo({"mx", "my", "mz"});
  Zoo reversed;
  reversed.representations = zoo.representations;
  for (auto it = zoo.members.rbegin(); it != zoo.members.rend(); ++it)
    reversed.members.push_back(*it);
  Zoo duplicated = zoo;
  duplicated.members.push_back(zoo.members.front());

  ScorerParams p = init_scorer_params(small_dims(), 12);
  RouteOptions opts;
  opts.seed = 4;
  Instruction ins = instruction_with_text("q", "compare orderings");
  RoutingDecision a = route_one(p, zoo, ins, opts);
  RoutingDecision b = route_one(p, reversed, ins, opts);
  RoutingDecision c = route_one(p, duplicated, ins, opts);
  CHECK(a.chosen_model == b.chosen_model);
  CHECK(a.chosen_model == c.chosen_model);
  CHECK(a.scores == b.scores);
  CHECK(a.scores == c.scores);
}

TEST_CASE("route_all: empty test set yields an empty assignment") {
  Zoo zoo = make_zoo({"m1"});
  ScorerParams p = zero_params();
  RouteOptions opts;
  RoutingAssignment a = route_all(p, zoo, {}, opts);
  CHECK(a.decisions.empty());
}

TEST_CASE("route_all: serial and 8-worker runs agree exactly") {
  Zoo zoo = make_zoo({"m1", "m2", "m3", "m4"});
  ScorerParams p = init_scorer_params(small_dims(), 21);
  std::vector<Instruction> instructions;
  Rng rng(77);
  for (int i = 0; i < 64; ++i)
    instructions.push_back(instruction_with_text(
        "q" + std::to_string(i), "body " + std::to_string(rng.next_u64() % 100000)));

  RouteOptions serial;
  serial.workers = 1;
  serial.seed = 1;
  RouteOptions parallel;
  parallel.workers = 8;
  parallel.seed = 1;
  RoutingAssignment a = route_all(p, zoo, instructions, serial);
  RoutingAssignment b = route_all(p, zoo, instructions, parallel);
  REQUIRE(a.decisions.size() == b.decisions.size());
  for (std::size_t i = 0; i < a.decisions.size(); ++i) {
    REQUIRE(a.decisions[i].instruction_id == b.decisions[i].instruction_id);
    REQUIRE(a.decisions[i].chosen_model == b.decisions[i].chosen_model);
    REQUIRE(a.decisions[i].scores == b.decisions[i].scores);
  }
}

TEST_CASE("route_all: matches route_one with the derived per-instruction seed") {
  Zoo zoo = make_zoo({"m1", "m2"});
  ScorerParams p = init_scorer_params(small_dims(), 33);
  Instruction ins = instruction_with_text("qx", "the body");
  RouteOptions opts;
  opts.seed = 99;
  RoutingAssignment all = route_all(p, zoo, {ins}, opts);
  RouteOptions derived = opts;
  derived.seed = opts.seed ^ fnv1a64("qx");
  RoutingDecision one = route_one(p, zoo, ins, derived);
  CHECK(all.decisions[0].chosen_model == one.chosen_model);
  CHECK(all.decisions[0].scores == one.scores);
}

// --------------------------------------------------------------- oracle route

TEST_CASE("oracle: a universally correct model is chosen everywhere it is first") {
  auto matrix = make_matrix({"111", "010"});
  RoutingAssignment a = oracle_route(matrix, matrix.model_ids());
  for (const auto& d : a.decisions) CHECK(d.chosen_model == "m000");
}

TEST_CASE("oracle: no correct model falls back to the lexicographically first") {
  auto matrix = make_matrix({"100", "100"});
  RoutingAssignment a = oracle_route(matrix, matrix.model_ids());
  CHECK(a.decisions[1].chosen_model == "m000");
  CHECK(a.decisions[2].chosen_model == "m000");
  // and those instructions score 0: no model handles them
  CHECK_FALSE(matrix.cell("m000", a.decisions[1].instruction_id));
}

TEST_CASE("oracle: lexicographically first among correct models") {
  auto matrix = make_matrix({"01", "11"});
  RoutingAssignment a = oracle_route(matrix, matrix.model_ids());
  CHECK(a.decisions[0].chosen_model == "m001");
  CHECK(a.decisions[1].chosen_model == "m000");
}

TEST_CASE("oracle: accuracy equals the fraction of covered instructions") {
  WorldConfig wc;
  wc.num_models = 5;
  wc.num_categories = 3;
  wc.num_train = 200;
  wc.num_test = 50;
  wc.seed = 91;
  World world = generate_world(wc);
  const CorrectnessMatrix& matrix = world.truth.matrix;
  RoutingAssignment a = oracle_route(matrix, matrix.model_ids());

  std::size_t oracle_correct = 0, covered = 0;
  for (const auto& d : a.decisions)
    if (matrix.cell(d.chosen_model, d.instruction_id)) ++oracle_correct;
  for (std::size_t i = 0; i < matrix.num_instructions(); ++i)
    for (std::size_t m = 0; m < matrix.num_models(); ++m)
      if (matrix.cell(m, i)) {
        ++covered;
        break;
      }
  CHECK(oracle_correct == covered);
}

TEST_CASE("oracle: adding a model never decreases oracle accuracy") {
  Rng rng(414);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t models = 2 + rng.uniform_index(4);
    std::size_t cols = 1 + rng.uniform_index(12);
    std::vector<std::string> rows(models, std::string(cols, '0'));
    for (auto& row : rows)
      for (auto& c : row) c = rng.uniform01() < 0.4 ? '1' : '0';
    auto matrix = make_matrix(rows);

    auto accuracy = [&](const std::vector<std::string>& ids) {
      RoutingAssignment a = oracle_route(matrix, ids);
      std::size_t n = 0;
      for (const auto& d : a.decisions)
        if (matrix.cell(d.chosen_model, d.instruction_id)) ++n;
      return static_cast<double>(n);
    };
    std::vector<std::string> subset(matrix.model_ids().begin(),
                                    matrix.model_ids().end() - 1);
    REQUIRE(accuracy(matrix.model_ids()) >= accuracy(subset));
  }
}

TEST_CASE("routed accuracy never exceeds oracle accuracy") {
  WorldConfig wc;
  wc.num_models = 4;
  wc.num_categories = 3;
  wc.subtopics_per_category = 3;
  wc.num_train = 300;
  wc.num_test = 60;
  wc.seed = 101;
  World world = generate_world(wc);
  CoreTaskSet core = sample_core_tasks(world.store, world.truth.matrix, 6, 20, 5);
  Zoo zoo;
  for (const auto& id : world.truth.model_ids) {
    ModelRecord rec;
    rec.model_id = id;
    zoo.members.push_back(rec);
    zoo.representations[id] = run_aptitude_test(id, world.evals, core);
  }
  ScorerParams p = init_scorer_params(small_dims(), 3);  // untrained: arbitrary scores
  std::vector<Instruction> test;
  for (const Instruction* ins : world.store.by_split(Split::test)) test.push_back(*ins);
  RouteOptions opts;
  RoutingAssignment routed = route_all(p, zoo, test, opts);
  RoutingAssignment oracle = oracle_route(world.truth.matrix, world.truth.model_ids);

  std::size_t routed_n = 0;
  for (const auto& d : routed.decisions)
    if (world.truth.matrix.cell(d.chosen_model, d.instruction_id)) ++routed_n;
  std::size_t oracle_n = 0;
  for (const auto& d : oracle.decisions) {
    Split split = world.store.get(d.instruction_id).split;
    if (split == Split::test && world.truth.matrix.cell(d.chosen_model, d.instruction_id))
      ++oracle_n;
  }
  CHECK(routed_n <= oracle_n);
}

TEST_CASE("assignment jsonl round-trip") {
  TempDir tmp;
  RoutingAssignment a;
  RoutingDecision d;
  d.instruction_id = "q1";
  d.chosen_model = "mx";
  d.scores = {{"mx", 0.75}, {"my", 0.25}};
  d.perturbation_seeds = {11, 22};
  a.decisions.push_back(d);
  write_assignment_jsonl(a, tmp.file("a.jsonl"));
  RoutingAssignment b = read_assignment_jsonl(tmp.file("a.jsonl"));
  REQUIRE(b.decisions.size() == 1);
  CHECK(b.decisions[0].chosen_model == "mx");
  CHECK(b.decisions[0].scores == d.scores);
  CHECK(b.decisions[0].perturbation_seeds == d.perturbation_seeds);
}
