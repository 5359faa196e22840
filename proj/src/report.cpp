#include "runsched/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace runsched {

namespace {

std::string num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

struct JobSpan {
  TimeTick release;
  TimeTick finish = kNever;
};

struct Rows {
  std::vector<std::string> labels;
  std::vector<std::string> task_of;  // owning task per row
};

Rows gantt_rows(const Trace& trace, GanttMode mode) {
  Rows rows;
  for (const auto& t : trace.tasks) {
    if (mode == GanttMode::Task) {
      rows.labels.push_back(t.id);
      rows.task_of.push_back(t.id);
    } else {
      for (const auto& r : t.runnables) {
        rows.labels.push_back(r);
        rows.task_of.push_back(t.id);
      }
    }
  }
  return rows;
}

}  // namespace

std::string gantt_ascii(const Trace& trace, GanttMode mode, TimeTick tick) {
  if (tick.us <= 0) throw std::invalid_argument("gantt tick must be positive");
  const auto rows = gantt_rows(trace, mode);
  const auto segs = segments(trace);
  const auto idle = idle_intervals(trace);

  std::map<std::pair<std::string, std::int64_t>, JobSpan> jobs;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::Release) jobs[{e.task, e.release_index}].release = e.time;
    if (e.kind == EventKind::Finish && e.runnable.empty()) jobs[{e.task, e.release_index}].finish = e.time;
  }

  const std::int64_t cells = (trace.horizon.us + tick.us - 1) / tick.us;
  std::size_t width = 4;
  for (const auto& l : rows.labels) width = std::max(width, l.size());

  std::string ruler(static_cast<std::size_t>(cells), ' ');
  for (std::int64_t c = 0; c < cells; c += 10) {
    const auto mark = std::to_string(c);
    if (c + static_cast<std::int64_t>(mark.size()) <= cells) ruler.replace(static_cast<std::size_t>(c), mark.size(), mark);
  }
  std::string out = "tick" + std::string(width - 4, ' ') + " |" + ruler + "| " + format_duration(tick) + "\n";
  for (std::size_t row = 0; row < rows.labels.size(); ++row) {
    const auto& label = rows.labels[row];
    const auto& task = rows.task_of[row];
    std::string line = label + std::string(width - label.size(), ' ') + " |";
    for (std::int64_t c = 0; c < cells; ++c) {
      // Doubled coordinates keep the midpoint integral.
      const std::int64_t mid2 = 2 * c * tick.us + tick.us;
      auto covers = [&](TimeTick a, TimeTick b) { return 2 * a.us <= mid2 && (b == kNever || mid2 < 2 * b.us); };
      char ch = '.';
      for (const auto& s : segs) {
        const bool mine = mode == GanttMode::Task ? s.task == label : s.runnable == label;
        if (mine && covers(s.start, s.end)) ch = '#';
      }
      if (ch == '.') {
        const bool cpu_idle = std::any_of(idle.begin(), idle.end(), [&](const Interval& i) { return covers(i.start, i.end); });
        if (cpu_idle) {
          for (const auto& [key, span] : jobs) {
            if (key.first != task || !covers(span.release, span.finish)) continue;
            if (mode == GanttMode::Runnable) {
              const bool done = std::any_of(segs.begin(), segs.end(), [&](const Segment& s) {
                return s.task == task && s.release_index == key.second && s.runnable == label && s.complete &&
                       2 * s.end.us <= mid2;
              });
              if (done) continue;
            }
            ch = '~';
          }
        }
      }
      line += ch;
    }
    out += line + "|\n";
  }
  return out;
}

std::string gantt_svg(const Trace& trace, GanttMode mode) {
  static const char* palette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
  const auto rows = gantt_rows(trace, mode);
  const std::int64_t width = std::max<std::int64_t>(trace.horizon.us, 1);
  const std::int64_t row_h = std::max<std::int64_t>(width / 40, 1);
  const std::int64_t height = row_h * static_cast<std::int64_t>(rows.labels.size() + 1);

  std::map<std::string, std::size_t> color;
  for (std::size_t i = 0; i < trace.tasks.size(); ++i) color[trace.tasks[i].id] = i % std::size(palette);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << ' ' << height
      << "\" preserveAspectRatio=\"none\" width=\"1200\" height=\"" << 30 * (rows.labels.size() + 1) << "\">\n";
  for (std::size_t row = 0; row < rows.labels.size(); ++row) {
    svg << "  <text x=\"0\" y=\"" << row_h * static_cast<std::int64_t>(row) + row_h / 2
        << "\" font-size=\"" << row_h / 2 << "\">" << rows.labels[row] << "</text>\n";
  }
  for (const auto& s : segments(trace)) {
    const auto& key = mode == GanttMode::Task ? s.task : s.runnable;
    auto it = std::find(rows.labels.begin(), rows.labels.end(), key);
    if (it == rows.labels.end()) continue;
    const auto row = static_cast<std::int64_t>(it - rows.labels.begin());
    svg << "  <rect x=\"" << s.start.us << "\" y=\"" << row * row_h << "\" width=\"" << s.length().us
        << "\" height=\"" << row_h * 4 / 5 << "\" fill=\"" << palette[color[s.task]] << "\"><title>" << s.task
        << '/' << s.runnable << " #" << s.release_index << " [" << s.start.us << ", " << s.end.us
        << ")</title></rect>\n";
  }
  const auto idle_row = static_cast<std::int64_t>(rows.labels.size());
  for (const auto& i : idle_intervals(trace)) {
    svg << "  <rect x=\"" << i.start.us << "\" y=\"" << idle_row * row_h << "\" width=\"" << (i.end - i.start).us
        << "\" height=\"" << row_h * 4 / 5 << "\" fill=\"#dddddd\"><title>idle [" << i.start.us << ", " << i.end.us
        << ")</title></rect>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<TaskDeadlineReport> deadline_report(const Trace& trace) {
  std::vector<TaskDeadlineReport> out;
  std::map<std::string, std::size_t> at;
  for (const auto& t : trace.tasks) {
    at[t.id] = out.size();
    TaskDeadlineReport r;
    r.task = t.id;
    out.push_back(r);
  }
  std::map<std::pair<std::string, std::int64_t>, TimeTick> released;
  for (const auto& e : trace.events) {
    auto it = at.find(e.task);
    if (it == at.end()) continue;
    auto& r = out[it->second];
    switch (e.kind) {
      case EventKind::Release:
        ++r.jobs;
        released[{e.task, e.release_index}] = e.time;
        break;
      case EventKind::Finish:
        if (e.runnable.empty()) {
          ++r.finished;
          const auto response = e.time - released[{e.task, e.release_index}];
          if (!r.worst_response || response > *r.worst_response) r.worst_response = response;
        }
        break;
      case EventKind::DeadlineMiss:
        ++r.misses;
        if (!r.first_miss || e.time < *r.first_miss) r.first_miss = e.time;
        break;
      default:
        break;
    }
  }
  return out;
}

std::string format_deadline_report(const std::vector<TaskDeadlineReport>& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %6s %8s %6s %14s %12s\n", "task", "jobs", "finished", "misses",
                "worst_resp_us", "first_miss_us");
  out += line;
  for (const auto& r : report) {
    const std::string worst = r.worst_response ? std::to_string(r.worst_response->us) : "-";
    const std::string first = r.first_miss ? std::to_string(r.first_miss->us) : "-";
    std::snprintf(line, sizeof line, "%-12s %6lld %8lld %6lld %14s %12s\n", r.task.c_str(),
                  static_cast<long long>(r.jobs), static_cast<long long>(r.finished), static_cast<long long>(r.misses),
                  worst.c_str(), first.c_str());
    out += line;
  }
  return out;
}

std::vector<SignalDivergence> diff_signals(const SignalLogs& a, const SignalLogs& b,
                                           const std::vector<std::string>& signals) {
  std::vector<std::string> names = signals;
  if (names.empty()) {
    for (const auto& [name, log] : a)
      if (b.contains(name)) names.push_back(name);
  }
  std::vector<SignalDivergence> out;
  for (const auto& name : names) {
    auto ia = a.find(name);
    auto ib = b.find(name);
    if (ia == a.end() || ib == b.end()) throw UnknownSignalError("unknown signal '" + name + "'");
    const auto& sa = ia->second.samples;
    const auto& sb = ib->second.samples;
    SignalDivergence d;
    d.signal = name;
    d.count_a = sa.size();
    d.count_b = sb.size();
    for (std::size_t i = 0; i < std::min(sa.size(), sb.size()); ++i) {
      if (sa[i].value != sb[i].value) {
        d.identical = false;
        d.index = i;
        d.time_a = sa[i].time;
        d.time_b = sb[i].time;
        d.value_a = sa[i].value;
        d.value_b = sb[i].value;
        break;
      }
    }
    out.push_back(d);
  }
  return out;
}

std::string format_divergence(const std::vector<SignalDivergence>& report) {
  std::string out;
  for (const auto& d : report) {
    out += d.signal + ": ";
    if (d.identical) {
      out += "identical over " + std::to_string(std::min(d.count_a, d.count_b)) + " commits";
    } else {
      out += "diverges at commit " + std::to_string(d.index) + " (a: t=" + std::to_string(d.time_a.us) +
             "us value=" + num(d.value_a) + ", b: t=" + std::to_string(d.time_b.us) + "us value=" + num(d.value_b) +
             ")";
    }
    if (d.count_a != d.count_b)
      out += " [commit counts differ: " + std::to_string(d.count_a) + " vs " + std::to_string(d.count_b) + "]";
    out += '\n';
  }
  return out;
}

}  // namespace runsched
