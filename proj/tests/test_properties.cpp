#include <doctest.h>

#include "properties.hpp"
#include "runsched/sort_order.hpp"

using namespace runsched;

TEST_CASE("random models round trip through the file format") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto m = gen::dataflow_model(seed);
    CAPTURE(seed);
    CHECK(parse_model(serialize_model(m)) == m);
    const auto s = split_model(m);
    CHECK(parse_model(serialize_model(s)) == s);
  }
}

TEST_CASE("sorted orders are topological and contiguous") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto m = gen::dataflow_model(seed);
    CAPTURE(seed);
    for (const auto& r : m.runnables) {
      const auto g = runnable_graph(m, r);
      const auto order = sorted_order(g);
      std::size_t non_ports = 0;
      for (const auto& b : g.blocks) non_ports += is_boundary_port(b.kind) ? 0 : 1;
      CHECK(order.entries.size() == non_ports);
      for (std::size_t i = 0; i < order.entries.size(); ++i) CHECK(order.entries[i].position == static_cast<int>(i));
      for (const auto& [a, b] : feedthrough_edges(g)) {
        const int pa = order.position_of(a), pb = order.position_of(b);
        if (pa >= 0 && pb >= 0) CHECK(pa < pb);
      }
    }
  }
}

TEST_CASE("split keeps budgets, blocks and connections") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto m = gen::dataflow_model(seed);
    const auto s = split_model(m);
    CAPTURE(seed);
    CHECK(s.blocks == m.blocks);
    CHECK(s.connections == m.connections);
    for (const auto& t : m.tasks) CHECK(s.wcet(*s.find_task(t.id)) == m.wcet(t));
    CHECK(validate(s).size() == validate(m).size());
  }
}

TEST_CASE("split preserves zero-time behavior") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto failure = props::split_preserves_zero_time(seed);
    CHECK_MESSAGE(!failure, failure.value_or(""));
  }
}

TEST_CASE("scheduler invariants") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto failure = props::scheduler_invariants(seed);
    CHECK_MESSAGE(!failure, failure.value_or(""));
  }
}

TEST_CASE("hyperperiod periodicity") {
  int applicable_count = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    bool applicable = false;
    const auto failure = props::hyperperiod_periodicity(seed, applicable);
    applicable_count += applicable;
    CHECK_MESSAGE(!failure, failure.value_or(""));
  }
  CHECK(applicable_count >= 50);
}

TEST_CASE("determinism") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto failure = props::determinism(seed);
    CHECK_MESSAGE(!failure, failure.value_or(""));
  }
}

TEST_CASE("timed traces keep the event order") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto m = gen::task_set(seed);
    const auto trace = simulate(m, 2 * hyperperiod(m));
    CAPTURE(seed);
    for (std::size_t i = 1; i < trace.events.size(); ++i) {
      const auto& a = trace.events[i - 1];
      const auto& b = trace.events[i];
      REQUIRE(a.time <= b.time);
      if (a.time == b.time) REQUIRE(event_kind_rank(a.kind) <= event_kind_rank(b.kind));
    }
  }
}
