#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "properties.hpp"
#include "runsched/report.hpp"

using namespace runsched;
using namespace runsched::literals;

namespace {

Model fixture(const std::string& name) { return load_model(std::string(RUNSCHED_MODELS_DIR) + "/" + name + ".json"); }

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::vector<double> values(const SignalLogs& logs, const std::string& s) {
  std::vector<double> out;
  for (const auto& x : logs.at(s).samples) out.push_back(x.value);
  return out;
}

Outcome criterion1() {
  Outcome o;
  const auto trace = simulate(fixture("model_a"), 20_ms);
  const std::vector<Segment> expected{{"T1", "R1", 0, 0_ms, 3_ms, true},
                                      {"T2", "R2", 0, 3_ms, 6_ms, true},
                                      {"T2", "R3", 0, 6_ms, 9_ms, true},
                                      {"T1", "R1", 1, 10_ms, 13_ms, true}};
  o.require(segments(trace) == expected, "segments differ from R1[0,3) R2[3,6) R3[6,9) R1[10,13)");
  const auto idle = idle_intervals(trace);
  o.require(!idle.empty() && idle[0] == Interval{9_ms, 10_ms}, "first idle interval is not [9,10) ms");
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto trace = simulate(fixture("model_b"), 20_ms);
  std::string order;
  for (const auto& s : segments(trace)) order += (order.empty() ? "" : " ") + s.runnable;
  o.require(order == "R1 R2 R1 R3 R4", "execution order was " + order);
  o.require(idle_intervals(trace) == std::vector<Interval>{{6_ms, 10_ms}}, "idle is not exactly [6,10) ms");
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto m = fixture("model_race");
  const auto horizon = 120_ms;
  const auto zero = zero_time_run(m, horizon);
  const auto timed = timed_run(m, horizon);
  const auto diff = diff_signals(zero.signals, timed.signals, {"R3.out"});
  o.require(!diff[0].identical, "no divergence reported on R3.out");

  const auto t = values(timed.signals, "R3.out");
  o.require(t.size() >= 4, "too few timed commits");
  bool alternates = t.size() >= 2 && t[1] == 0.0 && t[0] != 0.0;
  for (std::size_t i = 2; i < t.size(); ++i) alternates = alternates && t[i] == t[i - 2];
  o.require(alternates, "timed R3.out does not alternate with 0 from the second commit");
  // out_k = 1 - out_{k-1}, out_{-1} = 0.
  double prev = 0.0;
  for (double v : t) {
    o.require(v == 1.0 - prev, "timed R3.out departs from the 1 - out recurrence");
    prev = v;
  }

  const auto z = values(zero.signals, "R3.out");
  o.require(std::is_sorted(z.begin(), z.end()), "zero-time R3.out is not non-decreasing");
  // A_k = k with out_k = A_k - out_{k-1}; R2 accumulates A.
  prev = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double a = static_cast<double>(k + 1);
    o.require(z[k] == a - prev, "zero-time R3.out departs from the A_k - out recurrence");
    prev = z[k];
  }
  o.require(z == std::vector<double>{1, 1, 2, 2, 3, 3}, "zero-time R3.out is not 1,1,2,2,3,3");
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto s = split_model(fixture("model_race"));
  o.require(s.find_task("T1")->runnables.size() == 2, "T1 does not have 2 sub-runnables");
  o.require(s.find_task("T2")->runnables.size() == 7, "T2 does not have 7 sub-runnables");
  o.require(exec_time_split(3000_us, 4) == std::vector<TimeTick>(4, 750_us), "3000 us / 4 is not 750 us each");
  bool r2 = true;
  for (int k = 1; k <= 4; ++k) r2 = r2 && s.find_runnable("R2_" + std::to_string(k))->budget == 750_us;
  o.require(r2, "R2 sub-runnables are not 750 us each");
  return o;
}

Outcome criterion5() {
  Outcome o;
  const auto m = fixture("model_race");
  const auto horizon = 120_ms;
  const auto zero = values(zero_time_run(m, horizon).signals, "R3.out");
  const auto split = values(timed_run(split_model(m), horizon).signals, "R3.out");
  o.require(!zero.empty() && zero == split, "split timed R3.out differs from zero-time");
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto m = fixture("model_servo");
  o.require(std::abs(utilization(m) - 1.2333) <= 1e-4, "utilization is not 1.2333");
  const auto report = deadline_report(simulate(m, 60_ms));
  o.require(report[0].task == "T1" && report[0].misses == 0, "T1 missed a deadline");
  o.require(report[2].task == "T3" && report[2].misses >= 1, "T3 never missed");
  o.require(report[2].first_miss && *report[2].first_miss <= 6_ms, "T3's first miss is after 6 ms");
  const auto run = timed_run(m, 90_ms);
  const double e1 = run.plants[0].mean_abs_error;
  const double e3 = run.plants[2].mean_abs_error;
  char buf[128];
  std::snprintf(buf, sizeof buf, "T3 error %.4f is not >= 2x T1 error %.4f", e3, e1);
  o.require(run.plants[0].plant == "servo1" && run.plants[2].plant == "servo3" && e3 >= 2 * e1, buf);
  return o;
}

Outcome criterion7() {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 50 && o.pass; ++seed)
    if (auto f = props::split_preserves_zero_time(seed)) o.require(false, "(a) " + *f);
  for (std::uint64_t seed = 1; seed <= 200 && o.pass; ++seed)
    if (auto f = props::scheduler_invariants(seed)) o.require(false, "(b) " + *f);
  int applicable = 0;
  for (std::uint64_t seed = 1; seed <= 200 && o.pass; ++seed) {
    bool a = false;
    if (auto f = props::hyperperiod_periodicity(seed, a)) o.require(false, "(c) " + *f);
    applicable += a;
  }
  o.require(applicable > 0, "(c) no task set met the idle-at-H precondition");
  for (std::uint64_t seed = 1; seed <= 30 && o.pass; ++seed)
    if (auto f = props::determinism(seed)) o.require(false, "(d) " + *f);
  return o;
}

struct Criterion {
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"MODEL_A schedule over 20 ms", criterion1},
      {"MODEL_B schedule and idle [6,10) ms", criterion2},
      {"race exposure on MODEL_RACE", criterion3},
      {"fine-grain counts and budgets", criterion4},
      {"split timed equals zero-time", criterion5},
      {"servo overload", criterion6},
      {"property suites", criterion7},
  };
  std::vector<std::size_t> selected;
  if (argc > 1) {
    for (int i = 1; i < argc; ++i) {
      const int n = std::atoi(argv[i]);
      if (n < 1 || n > static_cast<int>(criteria.size())) {
        std::fprintf(stderr, "unknown criterion %s\n", argv[i]);
        return 2;
      }
      selected.push_back(static_cast<std::size_t>(n - 1));
    }
  } else {
    for (std::size_t i = 0; i < criteria.size(); ++i) selected.push_back(i);
  }

  int failures = 0;
  for (auto i : selected) {
    Outcome o;
    try {
      o = criteria[i].check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %zu: %s - %s%s%s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].name,
                o.pass ? "" : ": ", o.detail.c_str());
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
