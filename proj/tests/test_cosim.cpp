#include <doctest.h>

#include <cmath>

#include "runsched/cosim.hpp"
#include "runsched/dataflow.hpp"
#include "support.hpp"

using namespace runsched;
using namespace runsched::literals;

namespace {

PlantSpec servo() {
  PlantSpec p;
  p.id = "p";
  return p;
}

// Brute-force explicit Euler at 1 us.
PlantState euler(const PlantSpec& p, PlantState s, TimeTick dt) {
  const double h = 1e-6;
  for (std::int64_t i = 0; i < dt.us; ++i) {
    const double v = s.v;
    s.v += h * (-p.a * s.v + p.b * s.u);
    s.x += h * v;
  }
  return s;
}

// One T1-style loop: the servo fixture's first controller alone.
Model single_loop() {
  auto m = fixtures::load("model_servo");
  m.tasks.resize(1);
  std::erase_if(m.runnables, [](const Runnable& r) { return r.id != "R1"; });
  std::erase_if(m.blocks, [](const Block& b) { return b.id.rfind("R1_", 0) != 0; });
  std::erase_if(m.connections, [](const Connection& c) { return c.src.block.rfind("R1_", 0) != 0; });
  return m;
}

}  // namespace

TEST_CASE("equilibrium without input") {
  const auto p = servo();
  const PlantState s{0.3, 0.0, 0.0};
  CHECK(plant_step(p, s, 10_ms) == s);
}

TEST_CASE("unit input from rest over 1 ms") {
  const auto p = servo();
  const auto s = plant_step(p, {0, 0, 1}, 1_ms);
  CHECK(s.x == doctest::Approx(5.0e-4).epsilon(0.01));
  const auto e = euler(p, {0, 0, 1}, 1_ms);
  CHECK(s.x == doctest::Approx(e.x).epsilon(0.01));
  CHECK(s.v == doctest::Approx(e.v).epsilon(0.001));
}

TEST_CASE("sub-stepping covers odd durations exactly") {
  const auto p = servo();
  const PlantState s0{0, 0, 0.5};
  const auto direct = plant_step(p, s0, TimeTick{1666});
  const auto euler_ref = euler(p, s0, TimeTick{1666});
  CHECK(direct.x == doctest::Approx(euler_ref.x).epsilon(0.01));
  PlantRuntime rt(p);
  rt.actuate(0.5);
  rt.advance_to(TimeTick{1666});
  CHECK(rt.time() == TimeTick{1666});
  CHECK(rt.state().x == doctest::Approx(direct.x).epsilon(1e-9));
}

TEST_CASE("RK4 micro-step convergence") {
  const auto p = servo();
  PlantState coarse{0, 0, 0}, fine{0, 0, 0};
  // Piecewise-constant input over 60 ms.
  for (int ms = 0; ms < 60; ++ms) {
    const double u = std::sin(ms * 0.3);
    coarse.u = fine.u = u;
    coarse = plant_step(p, coarse, 1_ms);
    for (int i = 0; i < 20; ++i) fine = plant_step(p, fine, TimeTick{50});
  }
  CHECK(std::abs(coarse.x - fine.x) <= 1e-6 * std::abs(fine.x));
}

TEST_CASE("reference square wave") {
  auto p = servo();
  p.ref_period = 60_ms;
  CHECK(reference_at(p, 0_ms) == 1.0);
  CHECK(reference_at(p, 29_ms) == 1.0);
  CHECK(reference_at(p, 30_ms) == -1.0);
  CHECK(reference_at(p, 59_ms) == -1.0);
  CHECK(reference_at(p, 60_ms) == 1.0);
}

TEST_CASE("pid edge cases") {
  PidParams p;
  PidMemory mem;
  for (int i = 0; i < 5; ++i) {
    const auto out = pid_eval({2.0, 0.1, 0.01, 10, 0}, 0.004, 0.0, mem);
    CHECK(out.u == 0.0);
    mem = out.next;
  }
  p.k = 1.0;
  for (double e : {0.5, -1.0, 3.0}) CHECK(pid_eval(p, 0.004, e, {}).u == e);
}

TEST_CASE("pid integral and filtered derivative") {
  const PidParams p{2.0, 0.5, 0.1, 10.0, 0.0};
  const double h = 0.01;
  auto a = pid_eval(p, h, 1.0, {});
  const double d1 = 0.1 * 10 / (0.1 + 10 * h) * 1.0;
  CHECK(a.u == doctest::Approx(2.0 * (1.0 + 0.0 + d1)));
  CHECK(a.next.integral == doctest::Approx(h / 0.5));
  auto b = pid_eval(p, h, 1.0, a.next);
  const double d2 = 0.1 / (0.1 + 10 * h) * d1;
  CHECK(b.u == doctest::Approx(2.0 * (1.0 + h / 0.5 + d2)));
}

TEST_CASE("controller binding samples at start and actuates at commit") {
  const auto m = single_loop();
  REQUIRE(validate(m).empty());
  Executor ex(m);
  Scheduler s(m, 4_ms, &ex);
  s.step();  // t = 0, R1 starts
  CHECK(ex.plants()[0]->state().u == 0.0);
  s.step();  // t = 2 ms, R1 commits
  CHECK(s.now() == 2_ms);
  CHECK(ex.plants()[0]->time() == 2_ms);
  const auto& u = ex.signals().at("R1.u").samples;
  REQUIRE(u.size() == 1);
  CHECK(u[0].time == 2_ms);
  CHECK(ex.plants()[0]->state().u == u[0].value);
  CHECK(u[0].value > 0.0);  // error at t=0 is the full reference step
}

TEST_CASE("zero-time controllers actuate at the release instant") {
  const auto r = zero_time_run(single_loop(), 8_ms);
  const auto& u = r.signals.at("R1.u").samples;
  REQUIRE(u.size() == 2);
  CHECK(u[0].time == 0_ms);
  CHECK(u[1].time == 4_ms);
}

TEST_CASE("deferred controller samples at its actual start") {
  auto m = fixtures::load("model_servo");
  Executor ex(m);
  Scheduler s(m, 20_ms, &ex);
  while (!s.done()) {
    s.step();
    if (s.running() && m.runnables[s.running()->runnable].id == "R2" && s.now() > 0_ms) {
      const auto& job = s.jobs()[s.running()->job];
      CHECK(s.running()->start == s.now());
      CHECK(s.now() >= job.release);
    }
  }
}

TEST_CASE("plant trajectory depends only on actuation instants") {
  PlantRuntime a(servo()), b(servo());
  a.actuate(0.2);
  b.actuate(0.2);
  a.advance_to(TimeTick{1234});
  a.advance_to(TimeTick{3777});
  a.advance_to(10_ms);
  b.advance_to(10_ms);
  CHECK(a.state().x == doctest::Approx(b.state().x).epsilon(1e-12));
  CHECK(b.peek(12_ms).x == doctest::Approx(plant_step(b.spec(), b.state(), 2_ms).x).epsilon(1e-12));
  CHECK(b.time() == 10_ms);
}

TEST_CASE("plant logs on the millisecond grid") {
  SignalLogs logs;
  PlantRuntime rt(servo());
  rt.advance_to(TimeTick{3500}, &logs);
  rt.advance_to(5_ms, &logs);
  const auto& y = logs.at("p.y").samples;
  REQUIRE(y.size() == 6);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i].time == TimeTick{static_cast<std::int64_t>(i) * 1000});
  CHECK(logs.at("p.ref").samples.size() == 6);
}

TEST_CASE("uncontrolled plant has unit mean error") {
  PlantRuntime rt(servo());
  rt.advance_to(90_ms);
  CHECK(rt.mean_abs_error() == doctest::Approx(1.0));
}

TEST_CASE("add_controller_runnable builds a valid loop") {
  Model m;
  m.plants.push_back(servo());
  const auto& r = add_controller_runnable(m, "C", "p", PidParams{1.0}, 1_ms);
  CHECK(r.blocks.size() == 5);
  m.tasks.push_back({"T", 4_ms, {}, 1, {}, {"C"}, {}});
  CHECK(validate(m).empty());
  CHECK(output_signals(m) == std::vector<std::string>{"C.u"});
  CHECK_THROWS_AS(add_controller_runnable(m, "C", "p", PidParams{}, 1_ms), ModelError);
  CHECK_THROWS_AS(add_controller_runnable(m, "D", "nope", PidParams{}, 1_ms), ModelError);
  const auto text = serialize_model(m);
  CHECK(parse_model(text) == m);
}

TEST_CASE("fixture gains stabilize the 4 ms loop") {
  const auto m = single_loop();
  const auto& plant = m.plants[0];
  const auto period = plant.ref_period;
  const auto horizon = 4 * period;
  const auto r = timed_run(m, horizon);
  const auto& y = r.signals.at("servo1.y").samples;
  // Tracking error just before every reference switch after three periods.
  int checked = 0;
  for (const auto& s : y) {
    if (s.time < 3 * period) continue;
    const auto phase = s.time.us % (period.us / 2);
    if (phase != period.us / 2 - 1000) continue;
    CHECK(std::abs(reference_at(plant, s.time) - s.value) < 0.05 * plant.ref_amplitude);
    ++checked;
  }
  CHECK(checked == 2);
  for (const auto& e : r.trace.events) CHECK(e.kind != EventKind::DeadlineMiss);
}
