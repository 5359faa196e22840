#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "runsched/cli.hpp"
#include "runsched/dataflow.hpp"
#include "runsched/fine_grain.hpp"
#include "runsched/model.hpp"
#include "runsched/report.hpp"
#include "runsched/sort_order.hpp"

namespace py = pybind11;
using namespace runsched;

namespace {

TimeTick horizon_or_default(const Model& m, std::optional<std::int64_t> horizon_us) {
  if (horizon_us) return TimeTick{*horizon_us};
  return m.sim.horizon.us > 0 ? m.sim.horizon : hyperperiod(m);
}

py::dict signals_dict(const SignalLogs& logs) {
  py::dict d;
  for (const auto& [name, log] : logs) {
    py::list samples;
    for (const auto& s : log.samples) samples.append(py::make_tuple(s.time.us, s.value));
    d[py::str(name)] = samples;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Runnable-level scheduling and dataflow simulator";

  py::register_exception<ModelError>(mod, "ModelError", PyExc_ValueError);
  py::register_exception<UnknownSignalError>(mod, "UnknownSignalError", PyExc_KeyError);
  py::register_exception<AlgebraicLoopError>(mod, "AlgebraicLoopError", PyExc_ValueError);

  py::class_<Model>(mod, "Model")
      .def_static("from_json", [](const std::string& text) { return parse_model(text); }, py::arg("text"))
      .def_static("from_file", &load_model, py::arg("path"))
      .def("to_json", [](const Model& m) { return serialize_model(m); })
      .def("validate",
           [](const Model& m) {
             py::list out;
             for (const auto& d : validate(m))
               out.append(py::make_tuple(d.severity == Severity::Error ? "ERROR" : "WARNING", d.code, d.message));
             return out;
           })
      .def("utilization", [](const Model& m) { return utilization(m); })
      .def("hyperperiod_us", [](const Model& m) { return hyperperiod(m).us; })
      .def("split", [](const Model& m) { return split_model(m); })
      .def("sorted_orders",
           [](const Model& m) {
             py::list out;
             for (const auto& o : model_sorted_orders(m)) {
               py::list entries;
               for (std::size_t i = 0; i < o.entries.size(); ++i)
                 entries.append(py::make_tuple(o.label(i), o.entries[i].block));
               out.append(entries);
             }
             return out;
           })
      .def_property_readonly("tasks",
                             [](const Model& m) {
                               py::list out;
                               for (const auto& t : m.tasks) {
                                 py::dict d;
                                 d["id"] = t.id;
                                 d["period_us"] = t.period.us;
                                 d["offset_us"] = t.offset.us;
                                 d["priority"] = t.priority;
                                 d["jitter_us"] = t.jitter.us;
                                 d["runnables"] = t.runnables;
                                 out.append(d);
                               }
                               return out;
                             })
      .def_property_readonly("runnables",
                             [](const Model& m) {
                               py::list out;
                               for (const auto& r : m.runnables) out.append(py::make_tuple(r.id, r.budget.us, r.blocks));
                               return out;
                             })
      .def("__eq__", [](const Model& a, const Model& b) { return a == b; });

  py::class_<RunResult>(mod, "RunResult")
      .def_property_readonly("signals", [](const RunResult& r) { return signals_dict(r.signals); })
      .def_property_readonly("segments",
                             [](const RunResult& r) {
                               py::list out;
                               for (const auto& s : segments(r.trace))
                                 out.append(py::make_tuple(s.task, s.runnable, s.release_index, s.start.us, s.end.us,
                                                           s.complete));
                               return out;
                             })
      .def_property_readonly("idle",
                             [](const RunResult& r) {
                               py::list out;
                               for (const auto& i : idle_intervals(r.trace)) out.append(py::make_tuple(i.start.us, i.end.us));
                               return out;
                             })
      .def_property_readonly("plants",
                             [](const RunResult& r) {
                               py::dict d;
                               for (const auto& p : r.plants) d[py::str(p.plant)] = p.mean_abs_error;
                               return d;
                             })
      .def("deadline_report",
           [](const RunResult& r) {
             py::list out;
             for (const auto& t : deadline_report(r.trace)) {
               py::dict d;
               d["task"] = t.task;
               d["jobs"] = t.jobs;
               d["finished"] = t.finished;
               d["misses"] = t.misses;
               d["worst_response_us"] = t.worst_response ? py::cast(t.worst_response->us) : py::none();
               d["first_miss_us"] = t.first_miss ? py::cast(t.first_miss->us) : py::none();
               out.append(d);
             }
             return out;
           })
      .def("trace_csv", [](const RunResult& r) { return trace_csv(r.trace); })
      .def("signals_csv", [](const RunResult& r) { return signals_csv(r.signals); })
      .def(
          "gantt",
          [](const RunResult& r, const std::string& rows, std::int64_t tick_us) {
            return gantt_ascii(r.trace, rows == "runnable" ? GanttMode::Runnable : GanttMode::Task, TimeTick{tick_us});
          },
          py::arg("rows") = "task", py::arg("tick_us") = 1000);

  mod.def(
      "simulate",
      [](const Model& m, std::optional<std::int64_t> horizon_us, const std::string& mode) {
        const auto h = horizon_or_default(m, horizon_us);
        if (mode == "zero-time") return zero_time_run(m, h);
        if (mode != "timed") throw std::invalid_argument("mode must be 'timed' or 'zero-time'");
        return timed_run(m, h);
      },
      py::arg("model"), py::arg("horizon_us") = py::none(), py::arg("mode") = "timed",
      py::call_guard<py::gil_scoped_release>());

  mod.def(
      "compare",
      [](const Model& m, std::vector<std::string> signals, bool split, std::optional<std::int64_t> horizon_us) {
        const auto h = horizon_or_default(m, horizon_us);
        if (signals.empty()) signals = output_signals(m);
        const auto a = zero_time_run(m, h);
        const auto b = timed_run(split ? split_model(m) : m, h);
        py::list out;
        for (const auto& d : diff_signals(a.signals, b.signals, signals)) {
          py::dict e;
          e["signal"] = d.signal;
          e["identical"] = d.identical;
          e["index"] = d.index;
          e["time_a_us"] = d.time_a.us;
          e["time_b_us"] = d.time_b.us;
          e["value_a"] = d.value_a;
          e["value_b"] = d.value_b;
          out.append(e);
        }
        return out;
      },
      py::arg("model"), py::arg("signals") = std::vector<std::string>{}, py::arg("split") = false,
      py::arg("horizon_us") = py::none());

  mod.def(
      "exec_time_split",
      [](std::int64_t c, std::size_t n) {
        std::vector<std::int64_t> out;
        for (auto t : exec_time_split(TimeTick{c}, n)) out.push_back(t.us);
        return out;
      },
      py::arg("budget_us"), py::arg("n"));

  mod.def("parse_duration", [](const std::string& s) { return parse_duration(s).us; }, py::arg("text"));

  mod.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
