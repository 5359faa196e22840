#pragma once

#include <map>
#include <string>

#include "runsched/model.hpp"
#include "runsched/time.hpp"

namespace runsched {

struct SignalLog;

inline constexpr TimeTick kPlantMicroStep{100};
inline constexpr TimeTick kPlantLogInterval{1000};

struct PlantState {
  double x = 0.0;  // position
  double v = 0.0;  // velocity
  double u = 0.0;  // held actuator input
  friend bool operator==(const PlantState&, const PlantState&) = default;
};

/// Integrates x' = v, v' = -a v + b u with u held, using RK4 sub-steps of at
/// most kPlantMicroStep that cover dt exactly.
PlantState plant_step(const PlantSpec& plant, PlantState state, TimeTick dt);

/// +amplitude for the first half of each reference period, -amplitude after.
double reference_at(const PlantSpec& plant, TimeTick t);

struct PidMemory {
  double integral = 0.0;
  double derivative = 0.0;
  double prev_error = 0.0;
  friend bool operator==(const PidMemory&, const PidMemory&) = default;
};

struct PidOutput {
  double u = 0.0;
  PidMemory next;
};

/// u = K (e + I + D), with I advanced by (h/Ti) e after use and D the
/// backward-difference derivative of e filtered with coefficient N.
PidOutput pid_eval(const PidParams& params, double h_seconds, double error, const PidMemory& state);

/// One plant advanced on the absolute micro-step grid. Sampling between grid
/// points peeks without disturbing the committed trajectory, so the
/// trajectory depends only on actuation instants.
class PlantRuntime {
 public:
  explicit PlantRuntime(PlantSpec spec);

  const PlantSpec& spec() const { return spec_; }
  TimeTick time() const { return time_; }
  const PlantState& state() const { return state_; }

  PlantState peek(TimeTick t) const;
  // Advances the committed trajectory; logs "<id>.y" and "<id>.ref" on the
  // 1 ms grid when `logs` is given.
  void advance_to(TimeTick t, std::map<std::string, SignalLog>* logs = nullptr);
  void actuate(double u) { state_.u = u; }

  /// Mean |reference - position| over [0, time()], sampled on the micro-step grid.
  double mean_abs_error() const;

 private:
  void log_sample(std::map<std::string, SignalLog>* logs) const;

  PlantSpec spec_;
  PlantState state_;
  TimeTick time_;
  double abs_error_integral_ = 0.0;
  bool logged_origin_ = false;
};

/// Adds to `m` a controller runnable for `plant`: PlantProbe -> error Sum ->
/// PidController -> PlantActuate, plus an Outport logging u as
/// "<runnable>.u". The caller maps the returned runnable onto a task.
const Runnable& add_controller_runnable(Model& m, const std::string& runnable_id,
                                        const std::string& plant, const PidParams& params,
                                        TimeTick budget);

}  // namespace runsched
