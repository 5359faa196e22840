#include "runsched/trace.hpp"

#include <map>
#include <tuple>

namespace runsched {

std::string_view event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::Release: return "Release";
    case EventKind::Start: return "Start";
    case EventKind::Preempt: return "Preempt";
    case EventKind::Resume: return "Resume";
    case EventKind::Finish: return "Finish";
    case EventKind::DeadlineMiss: return "DeadlineMiss";
    case EventKind::IdleStart: return "IdleStart";
    case EventKind::IdleEnd: return "IdleEnd";
  }
  return "?";
}

int event_kind_rank(EventKind kind) {
  switch (kind) {
    case EventKind::IdleEnd: return 0;
    case EventKind::Finish: return 1;
    case EventKind::DeadlineMiss: return 2;
    case EventKind::Release: return 3;
    case EventKind::Preempt: return 4;
    case EventKind::Resume: return 5;
    case EventKind::Start: return 6;
    case EventKind::IdleStart: return 7;
  }
  return 8;
}

std::vector<Segment> segments(const Trace& trace) {
  std::vector<Segment> out;
  std::map<std::tuple<std::string, std::string, std::int64_t>, std::size_t> open;
  for (const auto& e : trace.events) {
    if (e.runnable.empty()) continue;
    const auto key = std::make_tuple(e.task, e.runnable, e.release_index);
    if (e.kind == EventKind::Start) {
      open[key] = out.size();
      out.push_back({e.task, e.runnable, e.release_index, e.time, trace.horizon, false});
    } else if (e.kind == EventKind::Finish) {
      if (auto it = open.find(key); it != open.end()) {
        out[it->second].end = e.time;
        out[it->second].complete = true;
        open.erase(it);
      }
    }
  }
  return out;
}

std::vector<Interval> idle_intervals(const Trace& trace) {
  std::vector<Interval> out;
  bool idle = false;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::IdleStart && !idle) {
      out.push_back({e.time, trace.horizon});
      idle = true;
    } else if (e.kind == EventKind::IdleEnd && idle) {
      out.back().end = e.time;
      idle = false;
    }
  }
  return out;
}

std::string trace_csv(const Trace& trace) {
  std::string out = "time_us,kind,task,runnable,release_index\n";
  for (const auto& e : trace.events) {
    out += std::to_string(e.time.us);
    out += ',';
    out += event_kind_name(e.kind);
    out += ',' + e.task + ',' + e.runnable + ',';
    if (e.release_index >= 0) out += std::to_string(e.release_index);
    out += '\n';
  }
  return out;
}

}  // namespace runsched
