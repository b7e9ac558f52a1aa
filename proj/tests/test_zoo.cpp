#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "caproute/errors.hpp"
#include "caproute/rng.hpp"
#include "caproute/sampling.hpp"
#include "caproute/synth.hpp"
#include "caproute/zoo.hpp"
#include "test_util.hpp"

using namespace caproute;
using namespace caproute::testing;

namespace {

CoreTaskSet tiny_core(int tasks, int shots) {
  CoreTaskSet core;
  for (int t = 0; t < tasks; ++t) {
    CoreTask task;
    task.task_name = "task" + std::to_string(t);
    task.keywords = {"k1", "k2", "k3", "k4", "k5"};
    for (int i = 0; i < shots; ++i)
      task.instruction_ids.push_back("t" + std::to_string(t) + "_i" + std::to_string(i));
    core.tasks.push_back(std::move(task));
  }
  return core;
}

EvalSet evals_with_accuracy(const CoreTaskSet& core, const std::string& model,
                            const std::vector<int>& correct_per_task) {
  EvalSet evals;
  for (std::size_t t = 0; t < core.tasks.size(); ++t) {
    const auto& ids = core.tasks[t].instruction_ids;
    for (std::size_t i = 0; i < ids.size(); ++i)
      evals.add({model, ids[i], "o", static_cast<int>(i) < correct_per_task[t], 0});
  }
  return evals;
}

CapabilityRepresentation single_task_rep(double accuracy,
                                         const std::array<std::string, 5>& keywords) {
  CapabilityRepresentation rep;
  rep.model_id = "m";
  TaskResult tr;
  tr.task_name = "t";
  tr.keywords = keywords;
  tr.accuracy = accuracy;
  rep.results.push_back(tr);
  return rep;
}

std::vector<std::string> sorted_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  std::sort(lines.begin(), lines.end());
  return lines;
}

}  // namespace

TEST_CASE("aptitude: all-correct model scores 1.0 on every task") {
  CoreTaskSet core = tiny_core(3, 20);
  std::vector<int> all{20, 20, 20};
  EvalSet evals = evals_with_accuracy(core, "m0", all);
  CapabilityRepresentation rep = run_aptitude_test("m0", evals, core);
  REQUIRE(rep.results.size() == 3);
  for (const auto& tr : rep.results) CHECK(tr.accuracy == doctest::Approx(1.0));
}

TEST_CASE("aptitude: 17 of 20 correct gives 0.85") {
  CoreTaskSet core = tiny_core(2, 20);
  EvalSet evals = evals_with_accuracy(core, "m0", {17, 5});
  CapabilityRepresentation rep = run_aptitude_test("m0", evals, core);
  CHECK(rep.results[0].accuracy == doctest::Approx(0.85));
  CHECK(rep.results[1].accuracy == doctest::Approx(0.25));
}

TEST_CASE("aptitude: coverage gap lists missing (task, instruction) pairs") {
  CoreTaskSet core = tiny_core(1, 20);
  EvalSet evals;
  for (int i = 0; i < 19; ++i) evals.add({"m0", "t0_i" + std::to_string(i), "o", true, 0});
  CHECK_THROWS_WITH_AS(run_aptitude_test("m0", evals, core), doctest::Contains("t0_i19"),
                       DataError);
}

TEST_CASE("aptitude: accuracies invariant to eval ingestion order") {
  WorldConfig wc;
  wc.num_models = 3;
  wc.num_categories = 3;
  wc.num_train = 240;
  wc.num_test = 0;
  wc.seed = 31;
  World world = generate_world(wc);
  CoreTaskSet core = sample_core_tasks(world.store, world.truth.matrix, 4, 20, 3);

  EvalSet shuffled;
  std::vector<EvalRecord> records = world.evals.records();
  Rng rng(8);
  rng.shuffle(records);
  for (auto& r : records) shuffled.add(std::move(r));

  for (const auto& model : world.truth.model_ids) {
    CapabilityRepresentation a = run_aptitude_test(model, world.evals, core);
    CapabilityRepresentation b = run_aptitude_test(model, shuffled, core);
    REQUIRE(a.results.size() == b.results.size());
    for (std::size_t t = 0; t < a.results.size(); ++t)
      REQUIRE(a.results[t].accuracy == b.results[t].accuracy);
  }
}

TEST_CASE("aptitude: synthetic accuracies equal a recount from the matrix") {
  WorldConfig wc;
  wc.num_models = 4;
  wc.num_categories = 4;
  wc.num_train = 400;
  wc.num_test = 0;
  wc.seed = 41;
  World world = generate_world(wc);
  CoreTaskSet core = sample_core_tasks(world.store, world.truth.matrix, 5, 20, 4);
  for (const auto& model : world.truth.model_ids) {
    CapabilityRepresentation rep = run_aptitude_test(model, world.evals, core);
    for (std::size_t t = 0; t < core.tasks.size(); ++t) {
      int correct = 0;
      for (const auto& id : core.tasks[t].instruction_ids)
        if (world.truth.matrix.cell(model, id)) ++correct;
      REQUIRE(rep.results[t].accuracy == doctest::Approx(correct / 20.0));
    }
  }
}

// ------------------------------------------------------------------ rendering

TEST_CASE("render: exact template line") {
  CapabilityRepresentation rep =
      single_task_rep(0.85, {"Mathematics", "Geometry", "Algebra", "Proof", "Logic"});
  std::string text = render_capability_text(rep);
  CHECK(text ==
        "The model achieves accuracy 85% on the task of "
        "'Mathematics, Geometry, Algebra, Proof, Logic'.\n");
}

TEST_CASE("render: fractional percent keeps one decimal") {
  CapabilityRepresentation rep = single_task_rep(0.855, {"a", "b", "c", "d", "e"});
  std::string text = render_capability_text(rep);
  CHECK(text.find("85.5%") != std::string::npos);
}

TEST_CASE("render: notes line is appended when present") {
  CapabilityRepresentation rep = single_task_rep(1.0, {"a", "b", "c", "d", "e"});
  rep.notes = "supports French and German";
  std::string text = render_capability_text(rep);
  CHECK(text.find("Notes: supports French and German\n") != std::string::npos);
}

TEST_CASE("render: identity permutation equals no permutation") {
  CoreTaskSet core = tiny_core(4, 2);
  EvalSet evals = evals_with_accuracy(core, "m0", {2, 1, 0, 2});
  CapabilityRepresentation rep = run_aptitude_test("m0", evals, core);
  std::vector<int> identity{0, 1, 2, 3};
  CHECK(render_capability_text(rep) == render_capability_text(rep, &identity));
}

TEST_CASE("render: sorted line multiset invariant under permutations") {
  CoreTaskSet core = tiny_core(6, 4);
  EvalSet evals = evals_with_accuracy(core, "m0", {0, 1, 2, 3, 4, 2});
  CapabilityRepresentation rep = run_aptitude_test("m0", evals, core);
  auto base = sorted_lines(render_capability_text(rep));
  Rng rng(123);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> perm{0, 1, 2, 3, 4, 5};
    rng.shuffle(perm);
    CHECK(sorted_lines(render_capability_text(rep, &perm)) == base);
  }
}

TEST_CASE("render: rejects a non-bijective permutation") {
  CapabilityRepresentation rep = single_task_rep(0.5, {"a", "b", "c", "d", "e"});
  std::vector<int> bad{0, 0};
  CHECK_THROWS_AS(render_capability_text(rep, &bad), DataError);
}

TEST_CASE("render: distinct accuracy vectors render distinct texts") {
  CoreTaskSet core = tiny_core(3, 20);
  std::set<std::string> rendered;
  std::vector<std::vector<int>> profiles = {{20, 10, 0}, {10, 20, 0}, {0, 10, 20}, {20, 10, 1}};
  for (const auto& p : profiles) {
    EvalSet evals = evals_with_accuracy(core, "m0", p);
    rendered.insert(render_capability_text(run_aptitude_test("m0", evals, core)));
  }
  CHECK(rendered.size() == profiles.size());
}

// ------------------------------------------------------------------ zoo update

namespace {

ModelRecord record(const std::string& id) {
  ModelRecord r;
  r.model_id = id;
  return r;
}

CapabilityRepresentation rep_for(const std::string& id) {
  CapabilityRepresentation rep = single_task_rep(0.5, {"a", "b", "c", "d", "e"});
  rep.model_id = id;
  return rep;
}

}  // namespace

TEST_CASE("zoo update: first release into an empty zoo") {
  Zoo zoo;
  Zoo updated = update_zoo_incremental(zoo, record("m1"), rep_for("m1"), {{"m1", 0.5}});
  CHECK(updated.members.size() == 1);
  CHECK(updated.members[0].model_id == "m1");
  CHECK(updated.representations.count("m1") == 1);
}

TEST_CASE("zoo update: lowest-scoring newcomer still joins as the latest, size 6") {
  Zoo zoo;
  std::map<std::string, double> scores;
  for (int i = 0; i < 6; ++i) {
    std::string id = "m" + std::to_string(i);
    scores[id] = 0.5 + 0.05 * i;
    zoo = update_zoo_incremental(zoo, record(id), rep_for(id), scores);
  }
  REQUIRE(zoo.members.size() == 6);

  scores["weak"] = 0.01;
  Zoo updated = update_zoo_incremental(zoo, record("weak"), rep_for("weak"), scores);
  CHECK(updated.members.size() == 6);
  std::set<std::string> members;
  for (const auto& m : updated.members) members.insert(m.model_id);
  CHECK(members.count("weak") == 1);            // latest always present
  CHECK(members.count("m0") == 0);              // m0 had the lowest historic score
  for (int i = 1; i < 6; ++i) CHECK(members.count("m" + std::to_string(i)) == 1);
}

TEST_CASE("zoo update: newcomer already in the top 5 keeps size 5") {
  Zoo zoo;
  std::map<std::string, double> scores;
  for (int i = 0; i < 5; ++i) {
    std::string id = "m" + std::to_string(i);
    scores[id] = 0.5;
    zoo = update_zoo_incremental(zoo, record(id), rep_for(id), scores);
  }
  scores["m9"] = 0.99;  // strongest so far: lands in the top 5 AND is latest
  Zoo updated = update_zoo_incremental(zoo, record("m9"), rep_for("m9"), scores);
  std::set<std::string> members;
  for (const auto& m : updated.members) members.insert(m.model_id);
  CHECK(members.count("m9") == 1);
  CHECK(updated.members.size() <= 6);

  // and a strict top-5 membership case: candidates are 6, newcomer strongest
  // -> top5 includes it -> union adds nothing -> size 5
  CHECK(updated.members.size() == 5);
}

TEST_CASE("zoo update: missing history score is an error") {
  Zoo zoo;
  CHECK_THROWS_AS(update_zoo_incremental(zoo, record("m1"), rep_for("m1"), {}), DataError);
}

TEST_CASE("zoo update: ties break lexicographically") {
  Zoo zoo;
  std::map<std::string, double> scores;
  for (const char* id : {"a", "b", "c", "d", "e", "f"}) {
    scores[id] = 0.5;  // all tied
    zoo = update_zoo_incremental(zoo, record(id), rep_for(id), scores);
  }
  // top 5 of {a..f} by (score, lex) = {a, b, c, d, e}; latest f joins
  std::set<std::string> members;
  for (const auto& m : zoo.members) members.insert(m.model_id);
  CHECK(members == std::set<std::string>{"a", "b", "c", "d", "e", "f"});

  scores["g"] = 0.5;
  Zoo updated = update_zoo_incremental(zoo, record("g"), rep_for("g"), scores);
  std::set<std::string> after;
  for (const auto& m : updated.members) after.insert(m.model_id);
  CHECK(after == std::set<std::string>{"a", "b", "c", "d", "e", "g"});
}

TEST_CASE("zoo update: size never exceeds 6 and the latest is always a member") {
  Zoo zoo;
  std::map<std::string, double> scores;
  Rng rng(7);
  for (int i = 0; i < 25; ++i) {
    std::string id = "m" + std::to_string(i);
    scores[id] = rng.uniform01();
    zoo = update_zoo_incremental(zoo, record(id), rep_for(id), scores);
    REQUIRE(zoo.members.size() <= 6);
    bool has_latest = false;
    for (const auto& m : zoo.members) has_latest = has_latest || m.model_id == id;
    REQUIRE(has_latest);
    for (const auto& m : zoo.members) REQUIRE(zoo.representations.count(m.model_id) == 1);
  }
}

TEST_CASE("zoo json round-trip") {
  TempDir tmp;
  Zoo zoo;
  zoo.members.push_back(record("ma"));
  zoo.members.back().params_b = 7.7;
  zoo.members.back().notes = "multilingual";
  zoo.representations["ma"] = rep_for("ma");
  write_zoo_json(zoo, tmp.file("zoo.json"));
  Zoo again = read_zoo_json(tmp.file("zoo.json"));
  REQUIRE(again.members.size() == 1);
  CHECK(again.members[0].model_id == "ma");
  CHECK(again.members[0].params_b == doctest::Approx(7.7));
  CHECK(*again.members[0].notes == "multilingual");
  CHECK(again.representations.at("ma").results.size() == 1);
}
