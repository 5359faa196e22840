#include "runsched/cosim.hpp"

#include <cmath>
#include <stdexcept>

#include "runsched/dataflow.hpp"

namespace runsched {

namespace {

PlantState rk4(const PlantSpec& p, PlantState s, double h) {
  auto dv = [&](double v) { return -p.a * v + p.b * s.u; };
  const double k1x = s.v, k1v = dv(s.v);
  const double k2x = s.v + 0.5 * h * k1v, k2v = dv(s.v + 0.5 * h * k1v);
  const double k3x = s.v + 0.5 * h * k2v, k3v = dv(s.v + 0.5 * h * k2v);
  const double k4x = s.v + h * k3v, k4v = dv(s.v + h * k3v);
  s.x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
  s.v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  return s;
}

TimeTick next_grid_point(TimeTick t, TimeTick step) { return TimeTick{(t.us / step.us + 1) * step.us}; }

}  // namespace

PlantState plant_step(const PlantSpec& plant, PlantState state, TimeTick dt) {
  TimeTick done{0};
  while (done < dt) {
    const TimeTick h = std::min(kPlantMicroStep, dt - done);
    state = rk4(plant, state, to_seconds(h));
    done += h;
  }
  return state;
}

double reference_at(const PlantSpec& plant, TimeTick t) {
  if (plant.ref_period.us <= 0) return plant.ref_amplitude;
  const auto phase = t.us % plant.ref_period.us;
  return 2 * phase < plant.ref_period.us ? plant.ref_amplitude : -plant.ref_amplitude;
}

PidOutput pid_eval(const PidParams& p, double h, double error, const PidMemory& state) {
  PidOutput out;
  double derivative = 0.0;
  if (p.td > 0.0) {
    const double denom = p.td + p.n * h;
    derivative = p.td / denom * state.derivative + p.td * p.n / denom * (error - state.prev_error);
  }
  out.u = p.k * (error + state.integral + derivative);
  out.next.integral = std::isinf(p.ti) ? state.integral : state.integral + h / p.ti * error;
  out.next.derivative = derivative;
  out.next.prev_error = error;
  return out;
}

PlantRuntime::PlantRuntime(PlantSpec spec) : spec_(std::move(spec)) {
  state_.x = spec_.x0;
  state_.v = spec_.v0;
}

PlantState PlantRuntime::peek(TimeTick t) const {
  if (t <= time_) return state_;
  PlantState s = state_;
  TimeTick at = time_;
  while (at < t) {
    const TimeTick to = std::min(next_grid_point(at, kPlantMicroStep), t);
    s = rk4(spec_, s, to_seconds(to - at));
    at = to;
  }
  return s;
}

void PlantRuntime::log_sample(std::map<std::string, SignalLog>* logs) const {
  if (!logs) return;
  auto put = [&](const std::string& name, double v) {
    auto& log = (*logs)[name];
    log.signal = name;
    log.append(time_, v);
  };
  put(spec_.id + ".y", state_.x);
  put(spec_.id + ".ref", reference_at(spec_, time_));
}

void PlantRuntime::advance_to(TimeTick t, std::map<std::string, SignalLog>* logs) {
  if (!logged_origin_ && time_.us == 0) {
    log_sample(logs);
    logged_origin_ = logs != nullptr;
  }
  while (time_ < t) {
    const TimeTick to = std::min(next_grid_point(time_, kPlantMicroStep), t);
    const TimeTick dt = to - time_;
    abs_error_integral_ += std::abs(reference_at(spec_, time_) - state_.x) * to_seconds(dt);
    state_ = rk4(spec_, state_, to_seconds(dt));
    time_ = to;
    if (time_.us % kPlantLogInterval.us == 0) log_sample(logs);
  }
}

double PlantRuntime::mean_abs_error() const {
  return time_.us > 0 ? abs_error_integral_ / to_seconds(time_) : 0.0;
}

const Runnable& add_controller_runnable(Model& m, const std::string& rid, const std::string& plant,
                                        const PidParams& params, TimeTick budget) {
  if (!m.find_plant(plant)) throw ModelError(ModelError::Kind::UnknownReference, "unknown plant '" + plant + "'");
  if (m.find_runnable(rid)) throw ModelError(ModelError::Kind::DuplicateId, "duplicate runnable id '" + rid + "'");
  const std::string probe = rid + "_probe", err = rid + "_err", pid = rid + "_pid", act = rid + "_act",
                    out = rid + "_u";
  for (const auto& id : {probe, err, pid, act, out})
    if (m.find_block(id)) throw ModelError(ModelError::Kind::DuplicateId, "duplicate block id '" + id + "'");

  m.blocks.push_back({probe, blocks::PlantProbe{plant}, {}, {"ref", "y"}});
  m.blocks.push_back({err, blocks::Sum{"+-"}, {"in1", "in2"}, {"out1"}});
  m.blocks.push_back({pid, blocks::PidController{params}, {"in1"}, {"out1"}});
  m.blocks.push_back({act, blocks::PlantActuate{plant}, {"in1"}, {}});
  m.blocks.push_back({out, blocks::Outport{1, rid + ".u"}, {"in1"}, {}});
  m.connections.push_back({{probe, 1}, {err, 1}});
  m.connections.push_back({{probe, 2}, {err, 2}});
  m.connections.push_back({{err, 1}, {pid, 1}});
  m.connections.push_back({{pid, 1}, {act, 1}});
  m.connections.push_back({{pid, 1}, {out, 1}});
  m.runnables.push_back({rid, {probe, err, pid, act, out}, budget, true, rid});
  return m.runnables.back();
}

}  // namespace runsched
