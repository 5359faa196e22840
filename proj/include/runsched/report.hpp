#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "runsched/dataflow.hpp"
#include "runsched/trace.hpp"

namespace runsched {

enum class GanttMode { Task, Runnable };

/// A ruler line with the cell index every 10 cells, then one row per task
/// (or runnable), one cell per tick. '#' marks a cell whose
/// midpoint is inside a segment of the row, '~' a cell where the row has
/// pending work while the processor idles, '.' anything else.
std::string gantt_ascii(const Trace& trace, GanttMode mode, TimeTick tick = TimeTick{1000});

/// SVG with one user unit per microsecond on the x axis.
std::string gantt_svg(const Trace& trace, GanttMode mode);

struct TaskDeadlineReport {
  std::string task;
  std::int64_t jobs = 0;
  std::int64_t finished = 0;
  std::int64_t misses = 0;
  std::optional<TimeTick> worst_response;
  std::optional<TimeTick> first_miss;
};

std::vector<TaskDeadlineReport> deadline_report(const Trace& trace);
std::string format_deadline_report(const std::vector<TaskDeadlineReport>& report);

class UnknownSignalError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Commit sequences are compared position by position; the first position
/// where values differ is the divergence. Extra trailing commits in one log
/// are counted but are not a divergence.
struct SignalDivergence {
  std::string signal;
  bool identical = true;
  std::size_t index = 0;  // 0-based commit position of the divergence
  TimeTick time_a;
  TimeTick time_b;
  double value_a = 0.0;
  double value_b = 0.0;
  std::size_t count_a = 0;
  std::size_t count_b = 0;
};

std::vector<SignalDivergence> diff_signals(const SignalLogs& a, const SignalLogs& b,
                                           const std::vector<std::string>& signals);
std::string format_divergence(const std::vector<SignalDivergence>& report);

}  // namespace runsched
