#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "runsched/fine_grain.hpp"
#include "support.hpp"

using namespace runsched;

namespace {

std::size_t count_runnables(const Model& m, const std::string& task) { return m.find_task(task)->runnables.size(); }

}  // namespace

TEST_CASE("equal budget shares") {
  CHECK(exec_time_split(TimeTick{3000}, 4) == std::vector<TimeTick>(4, TimeTick{750}));
  CHECK(exec_time_split(TimeTick{5000}, 3) == std::vector<TimeTick>{TimeTick{1666}, TimeTick{1666}, TimeTick{1668}});
  CHECK(exec_time_split(TimeTick{1234}, 1) == std::vector<TimeTick>{TimeTick{1234}});
  CHECK_THROWS_AS(exec_time_split(TimeTick{10}, 0), std::invalid_argument);
  for (std::int64_t c : {1, 7, 999, 5000, 12345})
    for (std::size_t n = 1; n <= 9; ++n) {
      const auto shares = exec_time_split(TimeTick{c}, n);
      const auto sum = std::accumulate(shares.begin(), shares.end(), TimeTick{0});
      CHECK(sum == TimeTick{c});
    }
}

TEST_CASE("runnable with four blocks splits in sorted order") {
  const auto m = fixtures::load("model_race");
  const auto& r2 = *m.find_runnable("R2");
  const auto g = runnable_graph(m, r2);
  const auto split = split_runnable(r2, g, sorted_order(g));
  REQUIRE(split.subrunnables.size() == 4);
  const std::vector<std::string> ids{"R2_1", "R2_2", "R2_3", "R2_4"};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(split.subrunnables[i].id == ids[i]);
    CHECK(split.subrunnables[i].budget == TimeTick{750});
    CHECK_FALSE(split.subrunnables[i].atomic);
    CHECK(split.subrunnables[i].origin == "R2");
  }
  CHECK(split.subrunnables[0].blocks == std::vector<std::string>{"R2_read"});
  CHECK(split.subrunnables[1].blocks == std::vector<std::string>{"R2_delay"});
  // The Outport rides with the Sum that drives it.
  CHECK(split.subrunnables[2].blocks == std::vector<std::string>{"R2_sum", "R2_out"});
  CHECK(split.subrunnables[3].blocks == std::vector<std::string>{"R2_write"});
}

TEST_CASE("MODEL_RACE split counts") {
  const auto s = split_model(fixtures::load("model_race"));
  CHECK(count_runnables(s, "T1") == 2);
  CHECK(count_runnables(s, "T2") == 7);
  CHECK(s.find_runnable("R3_1")->budget == TimeTick{1666});
  CHECK(s.find_runnable("R3_3")->budget == TimeTick{1668});
  CHECK(validate(s).empty());
}

TEST_CASE("task order keeps runnables contiguous") {
  const auto s = split_model(fixtures::load("model_a"));
  const std::vector<std::string> expected{"R2_1", "R2_2", "R2_3", "R2_4", "R3_1", "R3_2", "R3_3"};
  CHECK(s.find_task("T2")->runnables == expected);
}

TEST_CASE("split preserves blocks and connections") {
  const auto m = fixtures::load("model_servo");
  std::vector<ConnectivityRecord> records;
  const auto s = split_model(m, records);
  CHECK(s.blocks == m.blocks);
  CHECK(s.connections == m.connections);
  std::multiset<std::string> before, after;
  for (const auto& r : m.runnables) before.insert(r.blocks.begin(), r.blocks.end());
  for (const auto& r : s.runnables) after.insert(r.blocks.begin(), r.blocks.end());
  CHECK(before == after);
  // 4 non-port blocks per controller.
  CHECK(records.size() == 12);
  CHECK(s.runnables.size() == 12);
  for (const auto& t : s.tasks) CHECK(m.wcet(*m.find_task(t.id)) == s.wcet(t));
}

TEST_CASE("single block runnable") {
  const auto m = parse_model(fixtures::kMinimal);
  const auto s = split_model(m);
  REQUIRE(s.runnables.size() == 1);
  CHECK(s.runnables[0].id == "R_1");
  CHECK(s.runnables[0].blocks == std::vector<std::string>{"C", "O"});
  CHECK(s.runnables[0].budget == TimeTick{1000});
}

TEST_CASE("split of a split is structurally the same") {
  const auto once = split_model(fixtures::load("model_b"));
  const auto twice = split_model(once);
  REQUIRE(once.runnables.size() == twice.runnables.size());
  for (std::size_t i = 0; i < once.runnables.size(); ++i) {
    CHECK(twice.runnables[i].id == once.runnables[i].id + "_1");
    CHECK(twice.runnables[i].blocks == once.runnables[i].blocks);
    CHECK(twice.runnables[i].budget == once.runnables[i].budget);
    CHECK(twice.runnables[i].origin == once.runnables[i].origin);
  }
}

TEST_CASE("runnable with only ports cannot be split") {
  auto m = parse_model(R"({
    "blocks": [
      {"id": "C", "kind": "Constant", "params": {"value": 1}},
      {"id": "O1", "kind": "Outport", "params": {"signal": "x"}},
      {"id": "I", "kind": "Inport", "params": {"signal": "x"}},
      {"id": "O2", "kind": "Outport", "params": {"signal": "y"}}
    ],
    "connections": [{"src": ["C", 1], "dst": ["O1", 1]}, {"src": ["I", 1], "dst": ["O2", 1]}],
    "runnables": [{"id": "A", "blocks": ["C", "O1"], "budget_us": 10},
                  {"id": "B", "blocks": ["I", "O2"], "budget_us": 10}],
    "tasks": [{"id": "T", "period_us": 100, "priority": 1, "runnables": ["A", "B"]}]
  })");
  CHECK_THROWS_AS(split_model(m), ModelError);
}

TEST_CASE("connectivity table") {
  std::vector<ConnectivityRecord> records;
  split_model(fixtures::load("model_race"), records);
  const auto csv = connectivity_csv(records);
  CHECK(csv.rfind("block,handle,inport,outport\n", 0) == 0);
  CHECK(csv.find("R2_sum,R2_3,1:R2_read.out1,1:R2_delay.in1\n") != std::string::npos);
  CHECK(csv.find("R2_sum,R2_3,2:R2_delay.out1,1:R2_write.in1\n") != std::string::npos);
  CHECK(csv.find("R2_sum,R2_3,,1:R2_out.in1\n") != std::string::npos);
  CHECK(csv.find("R1_const,R1_1,,1:R1_write.in1\n") != std::string::npos);
  std::set<std::string> covered;
  for (const auto& r : records) covered.insert(r.block);
  CHECK(covered.size() == 2 + 4 + 3);
}
