#include "runsched/dataflow.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <stdexcept>
#include <tuple>

#include "runsched/sort_order.hpp"

namespace runsched {

namespace {

template <class... F>
struct Overloaded : F... {
  using F::operator()...;
};
template <class... F>
Overloaded(F...) -> Overloaded<F...>;

std::string format_value(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

void SignalLog::append(TimeTick t, double v) {
  if (!samples.empty() && samples.back().time == t) {
    samples.back().value = v;
    return;
  }
  samples.push_back({t, v});
}

std::string signals_csv(const SignalLogs& logs) {
  std::vector<std::tuple<TimeTick, const std::string*, double>> rows;
  for (const auto& [name, log] : logs)
    for (const auto& s : log.samples) rows.emplace_back(s.time, &name, s.value);
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), *std::get<1>(a)) < std::tie(std::get<0>(b), *std::get<1>(b));
  });
  std::string out = "time_us,signal,value\n";
  for (const auto& [t, name, v] : rows) out += std::to_string(t.us) + ',' + *name + ',' + format_value(v) + '\n';
  return out;
}

BlockResult eval_block(const Block& block, std::span<const double> in, const BlockEnv& env) {
  const auto arity = expected_arity(block.kind);
  const bool delay = std::holds_alternative<blocks::UnitDelay>(block.kind);
  if (in.size() != arity.inports && !(delay && in.empty()))
    throw std::logic_error("block " + block.id + " expects " + std::to_string(arity.inports) + " inputs, got " +
                           std::to_string(in.size()));
  BlockResult r;
  std::visit(Overloaded{
                 [&](const blocks::Constant& k) { r.outputs = {k.value}; },
                 [&](const blocks::Gain& k) { r.outputs = {k.factor * in[0]}; },
                 [&](const blocks::Sum& k) {
                   double acc = 0.0;
                   for (std::size_t i = 0; i < in.size(); ++i) acc += k.signs[i] == '-' ? -in[i] : in[i];
                   r.outputs = {acc};
                 },
                 [&](const blocks::UnitDelay&) {
                   r.outputs = {env.delay_state};
                   if (!in.empty()) r.delay_next = in[0];
                 },
                 [&](const blocks::DataStoreRead&) { r.outputs = {env.store_value}; },
                 [&](const blocks::DataStoreWrite&) { r.store_write = in[0]; },
                 [&](const blocks::Inport&) { r.outputs = {env.signal_value}; },
                 [&](const blocks::Outport&) { r.record = in[0]; },
                 [&](const blocks::PidController& k) {
                   const double h = k.params.h > 0.0 ? k.params.h : env.pid_h;
                   auto out = pid_eval(k.params, h, in[0], env.pid);
                   r.outputs = {out.u};
                   r.pid_next = out.next;
                 },
                 [&](const blocks::PlantProbe&) { r.outputs = {env.plant_reference, env.plant_position}; },
                 [&](const blocks::PlantActuate&) { r.actuation = in[0]; },
             },
             block.kind);
  return r;
}

struct Executor::Impl {
  struct Source {
    std::size_t block = 0;
    int port = 0;  // 0 when unconnected
  };
  struct Plan {
    std::vector<std::size_t> inports;
    std::vector<std::size_t> order;  // sorted non-port blocks
    std::vector<std::size_t> outports;
    std::vector<std::size_t> delays;  // delays updated by this runnable
    double pid_h = 0.0;
    std::vector<bool> member;
  };
  struct Pending {
    std::size_t runnable = 0;
    std::map<std::size_t, std::vector<double>> wires;
    std::vector<std::pair<std::string, double>> store_writes;
    std::vector<std::pair<std::size_t, double>> delay_updates;
    std::vector<std::pair<std::size_t, PidMemory>> pid_updates;
    std::vector<std::pair<std::string, double>> records;
    std::vector<std::pair<std::size_t, double>> actuations;
  };

  const Model& model;
  std::vector<std::vector<Source>> sources;  // per block, per inport
  std::vector<std::vector<double>> wires;
  std::map<std::string, double> stores;
  std::vector<double> delay_state;
  std::vector<PidMemory> pid_state;
  std::map<std::string, double> signal_values;
  std::vector<PlantRuntime> plants;
  std::map<std::string, std::size_t> plant_index;
  SignalLogs logs;
  std::vector<Plan> plans;
  std::optional<Pending> pending;

  explicit Impl(const Model& m) : model(m) {
    const auto nb = m.blocks.size();
    sources.resize(nb);
    wires.resize(nb);
    delay_state.assign(nb, 0.0);
    pid_state.resize(nb);
    for (std::size_t i = 0; i < nb; ++i) {
      const auto& b = m.blocks[i];
      sources[i].resize(expected_arity(b.kind).inports);
      wires[i].assign(expected_arity(b.kind).outports, 0.0);
      if (auto* d = std::get_if<blocks::UnitDelay>(&b.kind)) delay_state[i] = d->initial;
    }
    for (const auto& c : m.connections) {
      const auto dst = *m.block_index(c.dst.block);
      const auto src = *m.block_index(c.src.block);
      if (c.dst.port >= 1 && static_cast<std::size_t>(c.dst.port) <= sources[dst].size())
        sources[dst][c.dst.port - 1] = {src, c.src.port};
    }
    for (const auto& [name, v] : m.stores) stores[name] = v;
    for (const auto& s : output_signals(m)) {
      signal_values[s] = 0.0;
      logs[s].signal = s;
    }
    for (const auto& p : m.plants) {
      plant_index[p.id] = plants.size();
      plants.emplace_back(p);
    }
    compile();
  }

  void compile() {
    const auto& m = model;
    std::vector<std::size_t> owner(m.blocks.size(), 0);
    std::vector<double> period(m.runnables.size(), 0.0);
    std::vector<bool> last_of_origin(m.runnables.size(), true);
    for (const auto& t : m.tasks) {
      for (std::size_t i = 0; i < t.runnables.size(); ++i) {
        const auto r = *m.runnable_index(t.runnables[i]);
        if (period[r] == 0.0) period[r] = to_seconds(t.period);
        for (std::size_t j = i + 1; j < t.runnables.size(); ++j)
          if (m.find_runnable(t.runnables[j])->origin == m.runnables[r].origin) last_of_origin[r] = false;
      }
    }
    plans.resize(m.runnables.size());
    for (std::size_t r = 0; r < m.runnables.size(); ++r) {
      const auto& run = m.runnables[r];
      auto& plan = plans[r];
      plan.pid_h = period[r];
      plan.member.assign(m.blocks.size(), false);
      for (const auto& id : run.blocks) {
        const auto b = *m.block_index(id);
        plan.member[b] = true;
        owner[b] = r;
      }
      const auto order = sorted_order(runnable_graph(m, run), static_cast<int>(r + 1));
      for (const auto& e : order.entries) plan.order.push_back(*m.block_index(e.block));
      for (std::size_t b = 0; b < m.blocks.size(); ++b) {
        if (!plan.member[b]) continue;
        if (std::holds_alternative<blocks::Inport>(m.blocks[b].kind)) plan.inports.push_back(b);
        if (std::holds_alternative<blocks::Outport>(m.blocks[b].kind)) plan.outports.push_back(b);
      }
    }
    for (std::size_t b = 0; b < m.blocks.size(); ++b) {
      if (!std::holds_alternative<blocks::UnitDelay>(m.blocks[b].kind)) continue;
      const auto& origin = m.runnables[owner[b]].origin;
      std::size_t updater = owner[b];
      for (const auto& t : m.tasks) {
        bool holds = std::find(t.runnables.begin(), t.runnables.end(), m.runnables[owner[b]].id) != t.runnables.end();
        if (!holds) continue;
        for (const auto& rid : t.runnables) {
          const auto ri = *m.runnable_index(rid);
          if (m.runnables[ri].origin == origin && last_of_origin[ri]) updater = ri;
        }
        break;
      }
      plans[updater].delays.push_back(b);
    }
  }

  double input(const Pending& p, std::size_t block, std::size_t port) const {
    const auto& s = sources[block][port];
    if (s.port == 0) return 0.0;
    if (auto it = p.wires.find(s.block); it != p.wires.end()) return it->second[s.port - 1];
    return wires[s.block][s.port - 1];
  }

  std::vector<double> inputs(const Pending& p, std::size_t block) const {
    std::vector<double> v(sources[block].size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = input(p, block, i);
    return v;
  }

  Pending evaluate(std::size_t runnable, TimeTick t) {
    const auto& plan = plans[runnable];
    Pending p;
    p.runnable = runnable;
    std::map<std::string, double> local_stores;

    for (auto b : plan.inports) {
      const auto& port = std::get<blocks::Inport>(model.blocks[b].kind);
      BlockEnv env;
      env.signal_value = signal_values[port.signal];
      p.wires[b] = eval_block(model.blocks[b], {}, env).outputs;
    }
    for (auto b : plan.order) {
      const auto& block = model.blocks[b];
      BlockEnv env;
      env.pid = pid_state[b];
      env.pid_h = plan.pid_h;
      env.delay_state = delay_state[b];
      std::vector<double> in;
      std::visit(Overloaded{
                     [&](const blocks::DataStoreRead& d) {
                       auto it = local_stores.find(d.store);
                       env.store_value = it != local_stores.end() ? it->second : stores[d.store];
                     },
                     [&](const blocks::PlantProbe& probe) {
                       const auto& plant = plants[plant_index.at(probe.plant)];
                       env.plant_reference = reference_at(plant.spec(), t);
                       env.plant_position = plant.peek(t).x;
                     },
                     [](const auto&) {},
                 },
                 block.kind);
      if (!std::holds_alternative<blocks::UnitDelay>(block.kind)) in = inputs(p, b);
      auto r = eval_block(block, in, env);
      p.wires[b] = std::move(r.outputs);
      if (r.store_write) {
        const auto& store = std::get<blocks::DataStoreWrite>(block.kind).store;
        local_stores[store] = *r.store_write;
        p.store_writes.emplace_back(store, *r.store_write);
      }
      if (r.pid_next) p.pid_updates.emplace_back(b, *r.pid_next);
      if (r.actuation) {
        const auto& plant = std::get<blocks::PlantActuate>(block.kind).plant;
        p.actuations.emplace_back(plant_index.at(plant), *r.actuation);
      }
    }
    for (auto b : plan.outports) {
      auto r = eval_block(model.blocks[b], inputs(p, b), {});
      p.records.emplace_back(std::get<blocks::Outport>(model.blocks[b].kind).signal, *r.record);
    }
    for (auto b : plan.delays) p.delay_updates.emplace_back(b, input(p, b, 0));
    return p;
  }

  void commit(Pending& p, TimeTick t) {
    for (auto& [b, v] : p.wires) wires[b] = std::move(v);
    for (const auto& [s, v] : p.store_writes) stores[s] = v;
    for (const auto& [b, v] : p.delay_updates) delay_state[b] = v;
    for (const auto& [b, v] : p.pid_updates) pid_state[b] = v;
    for (const auto& [s, v] : p.records) {
      signal_values[s] = v;
      auto& log = logs[s];
      log.signal = s;
      log.append(t, v);
    }
    for (const auto& [i, u] : p.actuations) {
      plants[i].advance_to(t, &logs);
      plants[i].actuate(u);
    }
  }
};

Executor::Executor(const Model& model) : impl_(std::make_unique<Impl>(model)) {}
Executor::~Executor() = default;

void Executor::on_segment_start(std::size_t runnable, TimeTick t) { impl_->pending = impl_->evaluate(runnable, t); }

void Executor::on_segment_end(std::size_t runnable, TimeTick t) {
  if (!impl_->pending || impl_->pending->runnable != runnable)
    throw std::logic_error("segment end without matching start");
  impl_->commit(*impl_->pending, t);
  impl_->pending.reset();
}

void Executor::run_runnable_atomic(std::size_t runnable, TimeTick sample_time, TimeTick commit_time) {
  auto p = impl_->evaluate(runnable, sample_time);
  impl_->commit(p, commit_time);
}

void Executor::finish(TimeTick horizon) {
  for (auto& p : impl_->plants) p.advance_to(horizon, &impl_->logs);
}

double Executor::store(const std::string& name) const {
  auto it = impl_->stores.find(name);
  if (it == impl_->stores.end()) throw std::out_of_range("unknown store '" + name + "'");
  return it->second;
}

const SignalLogs& Executor::signals() const { return impl_->logs; }

std::vector<const PlantRuntime*> Executor::plants() const {
  std::vector<const PlantRuntime*> out;
  for (const auto& p : impl_->plants) out.push_back(&p);
  return out;
}

namespace {

RunResult collect(const Executor& ex, Trace trace) {
  RunResult result;
  result.trace = std::move(trace);
  result.signals = ex.signals();
  for (const auto* p : ex.plants()) result.plants.push_back({p->spec().id, p->mean_abs_error()});
  return result;
}

}  // namespace

RunResult zero_time_run(const Model& model, TimeTick horizon) {
  require_valid(model);
  Executor ex(model);
  Trace trace;
  trace.horizon = horizon;
  const auto n = model.tasks.size();

  struct ZJob {
    std::int64_t index;
    TimeTick release;
  };
  std::vector<std::vector<ZJob>> queue(n);
  std::vector<std::int64_t> completed(n, 0);
  std::vector<std::vector<std::size_t>> preds(n);
  std::vector<std::vector<std::size_t>> runnables(n);
  std::map<TimeTick, std::vector<std::pair<std::size_t, std::int64_t>>> releases;
  for (std::size_t t = 0; t < n; ++t) {
    const auto& task = model.tasks[t];
    trace.tasks.push_back({task.id, task.period, task.priority, task.runnables});
    for (const auto& p : task.prect) preds[t].push_back(*model.task_index(p));
    for (const auto& r : task.runnables) runnables[t].push_back(*model.runnable_index(r));
    for (std::int64_t k = 0;; ++k) {
      const TimeTick at = k * task.period + task.offset;
      if (at >= horizon) break;
      releases[at].emplace_back(t, k);
      if (task.period.us <= 0) break;
    }
  }
  std::vector<std::size_t> by_priority(n);
  for (std::size_t t = 0; t < n; ++t) by_priority[t] = t;
  std::stable_sort(by_priority.begin(), by_priority.end(),
                   [&](std::size_t a, std::size_t b) { return model.tasks[a].priority > model.tasks[b].priority; });

  auto event = [&](TimeTick t, EventKind kind, std::size_t task, std::int64_t k, std::string runnable = {}) {
    trace.events.push_back({t, kind, model.tasks[task].id, std::move(runnable), k});
  };

  for (const auto& [t, list] : releases) {
    for (const auto& [task, k] : list) {
      queue[task].push_back({k, t});
      event(t, EventKind::Release, task, k);
    }
    for (bool progressed = true; progressed;) {
      progressed = false;
      for (auto task : by_priority) {
        if (queue[task].empty()) continue;
        const auto job = queue[task].front();
        if (std::any_of(preds[task].begin(), preds[task].end(),
                        [&](std::size_t p) { return completed[p] < job.index + 1; }))
          continue;
        for (auto r : runnables[task]) {
          event(t, EventKind::Start, task, job.index, model.runnables[r].id);
          ex.run_runnable_atomic(r, t, t);
          event(t, EventKind::Finish, task, job.index, model.runnables[r].id);
        }
        event(t, EventKind::Finish, task, job.index);
        if (t > job.release + model.tasks[task].period) event(t, EventKind::DeadlineMiss, task, job.index);
        ++completed[task];
        queue[task].erase(queue[task].begin());
        progressed = true;
        break;
      }
    }
  }
  for (std::size_t task = 0; task < n; ++task)
    for (const auto& job : queue[task]) {
      const auto deadline = job.release + model.tasks[task].period;
      if (deadline <= horizon) event(deadline, EventKind::DeadlineMiss, task, job.index);
    }
  std::stable_sort(trace.events.begin(), trace.events.end(),
                   [](const TraceEvent& a, const TraceEvent& b) { return a.time < b.time; });
  ex.finish(horizon);
  return collect(ex, std::move(trace));
}

RunResult timed_run(const Model& model, TimeTick horizon) {
  require_valid(model);
  Executor ex(model);
  auto trace = simulate(model, horizon, &ex);
  ex.finish(horizon);
  return collect(ex, std::move(trace));
}

}  // namespace runsched
