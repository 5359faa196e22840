#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "runsched/time.hpp"

namespace runsched {

enum class EventKind { Release, Start, Preempt, Resume, Finish, DeadlineMiss, IdleStart, IdleEnd };

std::string_view event_kind_name(EventKind kind);

// Order of kinds sharing one instant in a timed trace:
// IdleEnd, Finish, DeadlineMiss, Release, Preempt, Resume, Start, IdleStart.
int event_kind_rank(EventKind kind);

/// Finish with an empty runnable marks job completion; Finish with a runnable
/// closes one execution segment. Idle events carry no task.
struct TraceEvent {
  TimeTick time;
  EventKind kind = EventKind::Release;
  std::string task;
  std::string runnable;
  std::int64_t release_index = -1;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct TaskInfo {
  std::string id;
  TimeTick period;
  int priority = 0;
  std::vector<std::string> runnables;

  friend bool operator==(const TaskInfo&, const TaskInfo&) = default;
};

struct Trace {
  std::vector<TaskInfo> tasks;  // declaration order
  TimeTick horizon;
  std::vector<TraceEvent> events;

  friend bool operator==(const Trace&, const Trace&) = default;
};

struct Segment {
  std::string task;
  std::string runnable;
  std::int64_t release_index = 0;
  TimeTick start;
  TimeTick end;
  bool complete = true;  // false when still executing at the horizon

  TimeTick length() const { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct Interval {
  TimeTick start;
  TimeTick end;
  friend bool operator==(const Interval&, const Interval&) = default;
};

std::vector<Segment> segments(const Trace& trace);
std::vector<Interval> idle_intervals(const Trace& trace);

/// "time_us,kind,task,runnable,release_index" with one row per event.
std::string trace_csv(const Trace& trace);

}  // namespace runsched
