#include "runsched/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>

#include "runsched/dataflow.hpp"
#include "runsched/fine_grain.hpp"
#include "runsched/model.hpp"
#include "runsched/report.hpp"
#include "runsched/sort_order.hpp"

namespace runsched::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string model;
  std::string horizon;
  std::string mode = "timed";
  bool split = false;
  std::optional<std::uint64_t> seed;
  std::string gantt;
  std::string gantt_mode = "task";
  std::string tick = "1ms";
  std::string trace;
  std::string signals;
  bool fail_on_miss = false;
  std::vector<std::string> watch;
  std::string output = "-";
  std::string connectivity;
};

Model load(const Options& o) {
  Model m;
  try {
    m = load_model(o.model);
  } catch (const ModelError& e) {
    throw UsageError(o.model + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
  if (o.seed) m.sim.seed = *o.seed;
  return m;
}

TimeTick duration(const std::string& text, const char* what) {
  try {
    return parse_duration(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(what) + ": " + e.what());
  }
}

TimeTick resolve_horizon(const Options& o, const Model& m) {
  if (!o.horizon.empty()) {
    auto h = duration(o.horizon, "--horizon");
    if (h.us <= 0) throw UsageError("--horizon must be positive");
    return h;
  }
  return m.sim.horizon.us > 0 ? m.sim.horizon : hyperperiod(m);
}

void write_to(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << text;
}

int report_diagnostics(const Model& m, std::ostream& out) {
  const auto diags = validate(m);
  for (const auto& d : diags)
    out << (d.severity == Severity::Error ? "ERROR " : "WARNING ") << d.code << ": " << d.message << '\n';
  return has_errors(diags) ? 1 : 0;
}

int cmd_validate(const Options& o, std::ostream& out) { return report_diagnostics(load(o), out); }

int cmd_sort(const Options& o, std::ostream& out) {
  auto m = load(o);
  if (o.split) m = split_model(m);
  for (const auto& order : model_sorted_orders(m))
    for (std::size_t i = 0; i < order.entries.size(); ++i) out << order.label(i) << "  " << order.entries[i].block << '\n';
  return 0;
}

int cmd_transform(const Options& o, std::ostream& out) {
  if (!o.split) throw UsageError("transform needs --split");
  const auto m = load(o);
  require_valid(m);
  std::vector<ConnectivityRecord> records;
  const auto split = split_model(m, records);
  write_to(o.output, serialize_model(split) + "\n", out);
  if (!o.connectivity.empty()) write_to(o.connectivity, connectivity_csv(records), out);
  return 0;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  auto m = load(o);
  const auto horizon = resolve_horizon(o, m);
  if (o.mode != "timed" && o.mode != "zero-time") throw UsageError("--mode must be timed or zero-time");
  const auto mode = o.gantt_mode == "runnable" ? GanttMode::Runnable : GanttMode::Task;
  if (o.gantt_mode != "task" && o.gantt_mode != "runnable") throw UsageError("--gantt-mode must be task or runnable");
  const auto tick = duration(o.tick, "--tick");
  if (tick.us <= 0) throw UsageError("--tick must be positive");
  if (o.split) {
    require_valid(m);
    m = split_model(m);
  }
  const auto result = o.mode == "zero-time" ? zero_time_run(m, horizon) : timed_run(m, horizon);

  if (!o.trace.empty()) write_to(o.trace, trace_csv(result.trace), out);
  if (!o.signals.empty()) write_to(o.signals, signals_csv(result.signals), out);
  if (!o.gantt.empty()) {
    const bool svg = o.gantt.size() > 4 && o.gantt.ends_with(".svg");
    write_to(o.gantt, svg ? gantt_svg(result.trace, mode) : gantt_ascii(result.trace, mode, tick), out);
  }
  if (o.trace.empty() && o.signals.empty() && o.gantt.empty()) out << signals_csv(result.signals);

  std::int64_t misses = 0;
  for (const auto& r : deadline_report(result.trace)) misses += r.misses;
  if (misses > 0) err << misses << " deadline miss" << (misses == 1 ? "" : "es") << '\n';
  return o.fail_on_miss && misses > 0 ? 1 : 0;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const auto m = load(o);
  const auto horizon = resolve_horizon(o, m);
  require_valid(m);
  auto watch = o.watch.empty() ? output_signals(m) : o.watch;
  const auto reference = zero_time_run(m, horizon);
  const auto timed = timed_run(o.split ? split_model(m) : m, horizon);
  std::vector<SignalDivergence> report;
  try {
    report = diff_signals(reference.signals, timed.signals, watch);
  } catch (const UnknownSignalError& e) {
    throw UsageError(e.what());
  }
  out << format_divergence(report);
  return std::all_of(report.begin(), report.end(), [](const auto& d) { return d.identical; }) ? 0 : 1;
}

int cmd_report(const Options& o, std::ostream& out) {
  auto m = load(o);
  const auto horizon = resolve_horizon(o, m);
  require_valid(m);
  if (o.split) m = split_model(m);
  char line[256];
  std::snprintf(line, sizeof line, "utilization %.4f\nhyperperiod %lldus\nhorizon %lldus\n", utilization(m),
                static_cast<long long>(hyperperiod(m).us), static_cast<long long>(horizon.us));
  out << line;
  std::snprintf(line, sizeof line, "%-12s %10s %10s %8s %10s %8s\n", "task", "period_us", "offset_us", "priority",
                "wcet_us", "util");
  out << line;
  for (const auto& t : m.tasks) {
    const auto c = m.wcet(t);
    std::snprintf(line, sizeof line, "%-12s %10lld %10lld %8d %10lld %8.4f\n", t.id.c_str(),
                  static_cast<long long>(t.period.us), static_cast<long long>(t.offset.us), t.priority,
                  static_cast<long long>(c.us), static_cast<double>(c.us) / static_cast<double>(t.period.us));
    out << line;
  }
  const auto result = timed_run(m, horizon);
  out << '\n' << format_deadline_report(deadline_report(result.trace));
  for (const auto& p : result.plants) {
    std::snprintf(line, sizeof line, "plant %s mean_abs_error %.6f\n", p.plant.c_str(), p.mean_abs_error);
    out << line;
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Runnable-level scheduling simulator"};
  app.name("runsched");
  app.require_subcommand(1);
  Options o;

  auto model_arg = [&](CLI::App* sub) { sub->add_option("model", o.model, "model file")->required(); };
  auto run_opts = [&](CLI::App* sub) {
    sub->add_option("--horizon", o.horizon, "simulation horizon (us|ms|s)");
    sub->add_option("--seed", o.seed, "jitter seed");
    sub->add_flag("--split", o.split, "apply the fine-grain split first");
  };

  auto* validate_cmd = app.add_subcommand("validate", "check a model file");
  model_arg(validate_cmd);

  auto* sort_cmd = app.add_subcommand("sort", "print the sorted order of every runnable");
  model_arg(sort_cmd);
  sort_cmd->add_flag("--split", o.split, "apply the fine-grain split first");

  auto* transform_cmd = app.add_subcommand("transform", "rewrite a model");
  model_arg(transform_cmd);
  transform_cmd->add_flag("--split", o.split, "split every runnable into single-block runnables");
  transform_cmd->add_option("-o,--output", o.output, "output model path (- for stdout)");
  transform_cmd->add_option("--connectivity", o.connectivity, "connectivity table CSV path");

  auto* simulate_cmd = app.add_subcommand("simulate", "run a simulation");
  model_arg(simulate_cmd);
  run_opts(simulate_cmd);
  simulate_cmd->add_option("--mode", o.mode, "timed or zero-time");
  simulate_cmd->add_option("--gantt", o.gantt, "gantt chart path (- for stdout, .svg for SVG)");
  simulate_cmd->add_option("--gantt-mode", o.gantt_mode, "task or runnable rows");
  simulate_cmd->add_option("--tick", o.tick, "ascii gantt cell width");
  simulate_cmd->add_option("--trace", o.trace, "trace CSV path");
  simulate_cmd->add_option("--signals", o.signals, "signal CSV path");
  simulate_cmd->add_flag("--fail-on-miss", o.fail_on_miss, "exit 1 on any deadline miss");

  auto* compare_cmd = app.add_subcommand("compare", "compare timed against zero-time outputs");
  model_arg(compare_cmd);
  run_opts(compare_cmd);
  compare_cmd->add_option("--signal", o.watch, "signal to watch (repeatable)");

  auto* report_cmd = app.add_subcommand("report", "utilization and deadline summary");
  model_arg(report_cmd);
  run_opts(report_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return 2;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(o, out);
    if (sort_cmd->parsed()) return cmd_sort(o, out);
    if (transform_cmd->parsed()) return cmd_transform(o, out);
    if (simulate_cmd->parsed()) return cmd_simulate(o, out, err);
    if (compare_cmd->parsed()) return cmd_compare(o, out);
    if (report_cmd->parsed()) return cmd_report(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const AlgebraicLoopError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace runsched::cli
