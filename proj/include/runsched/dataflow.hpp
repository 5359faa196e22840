#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "runsched/cosim.hpp"
#include "runsched/engine.hpp"
#include "runsched/model.hpp"
#include "runsched/trace.hpp"

namespace runsched {

struct Sample {
  TimeTick time;
  double value = 0.0;
  friend bool operator==(const Sample&, const Sample&) = default;
};

struct SignalLog {
  std::string signal;
  std::vector<Sample> samples;

  // A second commit at the same instant replaces the first.
  void append(TimeTick t, double v);
  friend bool operator==(const SignalLog&, const SignalLog&) = default;
};

using SignalLogs = std::map<std::string, SignalLog>;

/// "time_us,signal,value", ordered by time then signal name.
std::string signals_csv(const SignalLogs& logs);

/// Inputs a block may observe beyond its wired inputs.
struct BlockEnv {
  double store_value = 0.0;   // DataStoreRead
  double delay_state = 0.0;   // UnitDelay
  double signal_value = 0.0;  // Inport
  double plant_reference = 0.0;
  double plant_position = 0.0;
  PidMemory pid;
  double pid_h = 0.0;  // seconds; used when the block's own h is 0
};

struct BlockResult {
  std::vector<double> outputs;
  std::optional<double> store_write;  // DataStoreWrite
  std::optional<double> delay_next;   // UnitDelay fed its input
  std::optional<double> record;       // Outport
  std::optional<double> actuation;    // PlantActuate
  std::optional<PidMemory> pid_next;  // PidController
};

/// Pure single-block evaluation. A UnitDelay accepts 0 inputs (output only)
/// or 1 (output plus next state). Throws std::logic_error on arity mismatch.
BlockResult eval_block(const Block& block, std::span<const double> inputs, const BlockEnv& env);

/// Per-run dataflow state and the two scheduler hooks. Reads observe the
/// state committed before the sample instant; writes land at the commit.
class Executor final : public SegmentHooks {
 public:
  explicit Executor(const Model& model);
  explicit Executor(Model&&) = delete;
  ~Executor() override;
  Executor(const Executor&) = delete;
  Executor& operator=(const Executor&) = delete;

  void on_segment_start(std::size_t runnable, TimeTick t) override;
  void on_segment_end(std::size_t runnable, TimeTick t) override;

  /// Sample at `sample_time`, commit at `commit_time`.
  void run_runnable_atomic(std::size_t runnable, TimeTick sample_time, TimeTick commit_time);

  /// Brings plants up to the horizon.
  void finish(TimeTick horizon);

  double store(const std::string& name) const;
  const SignalLogs& signals() const;
  std::vector<const PlantRuntime*> plants() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct PlantSummary {
  std::string plant;
  double mean_abs_error = 0.0;
};

struct RunResult {
  Trace trace;
  SignalLogs signals;
  std::vector<PlantSummary> plants;
};

/// Reference semantics: every release executes instantly and completely at
/// its release instant, highest priority first, so samples and commits
/// coincide. Jitter is ignored.
RunResult zero_time_run(const Model& model, TimeTick horizon);

/// The scheduler's segments drive sampling (segment start) and commits
/// (segment end).
RunResult timed_run(const Model& model, TimeTick horizon);

}  // namespace runsched
