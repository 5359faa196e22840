#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "runsched/model.hpp"
#include "runsched/trace.hpp"

namespace runsched {

/// k*period + offset + jitter_k for every k with k*period + offset < horizon.
/// jitter_k is uniform in [0, J], drawn from a generator seeded with
/// (seed, task id, k), so lists are reproducible per task and instance.
std::vector<TimeTick> release_times(const Task& task, TimeTick horizon, std::uint64_t seed);

enum class JobState { Ready, Running, Finished };

struct Job {
  std::size_t task = 0;  // index into Model::tasks
  std::int64_t index = 0;
  TimeTick release;
  TimeTick deadline;
  std::size_t cursor = 0;  // position in the task's runnable list
  std::vector<TimeTick> remaining;
  JobState state = JobState::Ready;
  bool displaced = false;  // started, then passed over at a boundary
  bool missed = false;
  std::optional<TimeTick> finish;
};

/// Synchronous callbacks fired by the scheduler around every segment.
class SegmentHooks {
 public:
  virtual ~SegmentHooks() = default;
  virtual void on_segment_start(std::size_t runnable, TimeTick t) = 0;
  virtual void on_segment_end(std::size_t runnable, TimeTick t) = 0;
};

struct RunningSegment {
  std::size_t job = 0;
  std::size_t runnable = 0;  // index into Model::runnables
  TimeTick start;
  TimeTick end;
};

/// Timed fixed-priority scheduler over decision instants (releases, segment
/// completions, deadlines). Runnables never preempt each other; a runnable
/// that cannot finish before the next release of a strictly higher-priority
/// task is held back and the processor idles until the next instant.
class Scheduler {
 public:
  Scheduler(const Model& model, TimeTick horizon, SegmentHooks* hooks = nullptr);
  Scheduler(Model&&, TimeTick, SegmentHooks* = nullptr) = delete;

  bool done() const { return done_; }
  TimeTick now() const { return now_; }

  // Processes one decision instant.
  void step();
  Trace run();

  const Model& model() const { return model_; }
  const std::vector<Job>& jobs() const { return jobs_; }
  const std::optional<RunningSegment>& running() const { return running_; }
  std::int64_t completed(std::size_t task) const { return completed_[task]; }
  const Trace& trace() const { return trace_; }

  /// Every predecessor task has completed at least index+1 instances.
  bool eligible(const Job& job) const;

  /// now + remaining(next runnable) <= earliest release after `now` of any
  /// task with strictly higher priority.
  bool fits_before_higher_release(const Job& job, TimeTick now) const;
  TimeTick next_higher_release(int priority, TimeTick now) const;

  /// Ready queue order: priority desc, release asc, declaration asc.
  std::vector<std::size_t> ready_queue() const;

 private:
  std::optional<TimeTick> next_instant() const;
  void complete_segment();
  void check_deadlines();
  void release_jobs();
  void dispatch();
  void emit(EventKind kind, const Job* job, std::string runnable = {});

  const Model& model_;
  TimeTick horizon_;
  SegmentHooks* hooks_;
  std::vector<std::vector<std::size_t>> task_runnables_;
  std::vector<std::vector<TimeTick>> releases_;
  std::vector<std::vector<TimeTick>> sorted_releases_;
  struct PendingRelease {
    TimeTick time;
    std::size_t task = 0;
    std::size_t index = 0;
  };
  std::vector<PendingRelease> pending_;
  std::size_t next_pending_ = 0;
  std::vector<std::vector<std::size_t>> predecessors_;
  std::vector<Job> jobs_;
  std::vector<std::int64_t> completed_;
  std::optional<RunningSegment> running_;
  bool idle_ = false;
  bool started_ = false;
  bool done_ = false;
  TimeTick now_;
  Trace trace_;
};

/// Validates the model, then runs the scheduler to the horizon.
Trace simulate(const Model& model, TimeTick horizon, SegmentHooks* hooks = nullptr);

}  // namespace runsched
