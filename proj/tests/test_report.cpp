#include <doctest.h>

#include <sstream>

#include "runsched/fine_grain.hpp"
#include "runsched/report.hpp"
#include "support.hpp"

using namespace runsched;
using namespace runsched::literals;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string cells(const std::string& row) {
  const auto a = row.find('|');
  const auto b = row.rfind('|');
  return row.substr(a + 1, b - a - 1);
}

}  // namespace

TEST_CASE("MODEL_B gantt rows") {
  const auto trace = simulate(fixtures::load("model_b"), 20_ms);
  const auto rows = lines(gantt_ascii(trace, GanttMode::Task));
  REQUIRE(rows.size() == 4);
  CHECK(rows[1].rfind("T1", 0) == 0);
  CHECK(cells(rows[1]) == "###.......###.......");
  CHECK(cells(rows[2]) == "...###~~~~...#####..");
  CHECK(cells(rows[3]) == "......~~~~........##");
}

TEST_CASE("MODEL_A gantt gives T2 six consecutive cells from cell 3") {
  const auto trace = simulate(fixtures::load("model_a"), 20_ms);
  const auto rows = lines(gantt_ascii(trace, GanttMode::Task));
  REQUIRE(rows.size() == 3);
  CHECK(cells(rows[2]) == "...######...........");
}

TEST_CASE("runnable rows") {
  const auto trace = simulate(fixtures::load("model_a"), 20_ms);
  const auto rows = lines(gantt_ascii(trace, GanttMode::Runnable));
  REQUIRE(rows.size() == 4);
  CHECK(cells(rows[2]) == "...###..............");
  CHECK(cells(rows[3]) == "......###...........");
}

TEST_CASE("sub-millisecond ticks use cell midpoints") {
  const auto trace = simulate(split_model(fixtures::load("model_race")), 10_ms);
  const auto rows = lines(gantt_ascii(trace, GanttMode::Task, 500_us));
  REQUIRE(rows.size() == 3);
  // R3_3 is deferred at 9332 us; the cell covering [9000, 9500) has midpoint 9250.
  CHECK(cells(rows[2]).substr(18, 2) == "#~");
  CHECK_THROWS_AS(gantt_ascii(trace, GanttMode::Task, 0_us), std::invalid_argument);
}

TEST_CASE("empty trace renders the header only") {
  Trace empty;
  const auto text = gantt_ascii(empty, GanttMode::Task);
  CHECK(lines(text).size() == 1);
  CHECK(text.rfind("tick", 0) == 0);
}

TEST_CASE("svg gantt uses microsecond units") {
  const auto svg = gantt_svg(simulate(fixtures::load("model_b"), 20_ms), GanttMode::Task);
  CHECK(svg.find("viewBox=\"0 0 20000 ") != std::string::npos);
  CHECK(svg.find("<rect x=\"13000\" y=\"500\" width=\"5000\"") != std::string::npos);
  CHECK(svg.find("idle [6000, 10000)") != std::string::npos);
  CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
}

TEST_CASE("deadline report for MODEL_B over 60 ms") {
  const auto report = deadline_report(simulate(fixtures::load("model_b"), 60_ms));
  REQUIRE(report.size() == 3);
  for (const auto& r : report) CHECK(r.misses == 0);
  CHECK(report[0].jobs == 6);
  CHECK(report[1].jobs == 3);
  REQUIRE(report[1].worst_response);
  CHECK(*report[1].worst_response == 18_ms);
  CHECK_FALSE(report[1].first_miss);
  const auto text = format_deadline_report(report);
  CHECK(text.find("T2") != std::string::npos);
  CHECK(text.find("18000") != std::string::npos);
}

TEST_CASE("deadline report for MODEL_SERVO over 60 ms") {
  const auto report = deadline_report(simulate(fixtures::load("model_servo"), 60_ms));
  CHECK(report[0].misses == 0);
  CHECK(report[2].misses >= 1);
  REQUIRE(report[2].first_miss);
  CHECK(*report[2].first_miss <= 6_ms);
}

TEST_CASE("task never released") {
  auto m = fixtures::load("model_a");
  m.tasks[1].offset = 50_ms;
  const auto report = deadline_report(simulate(m, 20_ms));
  CHECK(report[1].jobs == 0);
  CHECK(report[1].misses == 0);
  CHECK_FALSE(report[1].worst_response);
}

TEST_CASE("diff zero-time against timed MODEL_RACE") {
  const auto m = fixtures::load("model_race");
  const auto a = zero_time_run(m, 60_ms).signals;
  const auto b = timed_run(m, 60_ms).signals;
  const auto d = diff_signals(a, b, {"R3.out"});
  REQUIRE(d.size() == 1);
  CHECK_FALSE(d[0].identical);
  CHECK(d[0].index == 1);
  CHECK(d[0].value_a == 1.0);
  CHECK(d[0].value_b == 0.0);
  CHECK(d[0].time_a == 20_ms);
  CHECK(d[0].time_b == 38_ms);
  const auto text = format_divergence(d);
  CHECK(text.find("R3.out: diverges at commit 1") != std::string::npos);
}

TEST_CASE("diff zero-time against split timed MODEL_RACE") {
  const auto m = fixtures::load("model_race");
  const auto a = zero_time_run(m, 120_ms).signals;
  const auto b = timed_run(split_model(m), 120_ms).signals;
  for (const auto& d : diff_signals(a, b, {"R3.out", "R2.out", "R1.out"})) {
    CAPTURE(d.signal);
    CHECK(d.identical);
  }
}

TEST_CASE("diff log against itself and unknown signals") {
  const auto a = zero_time_run(fixtures::load("model_a"), 60_ms).signals;
  for (const auto& d : diff_signals(a, a, {})) CHECK(d.identical);
  CHECK(diff_signals(a, a, {}).size() == 3);
  CHECK_THROWS_AS(diff_signals(a, a, {"nope"}), UnknownSignalError);
}

TEST_CASE("length differences are reported but not divergent") {
  SignalLogs a, b;
  a["x"] = {"x", {{0_ms, 1.0}, {1_ms, 2.0}}};
  b["x"] = {"x", {{0_ms, 1.0}}};
  const auto d = diff_signals(a, b, {"x"});
  CHECK(d[0].identical);
  CHECK(d[0].count_a == 2);
  CHECK(d[0].count_b == 1);
  CHECK(format_divergence(d).find("commit counts differ: 2 vs 1") != std::string::npos);
}
