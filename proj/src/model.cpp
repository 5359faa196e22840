#include "runsched/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "runsched/sort_order.hpp"

namespace runsched {

namespace {

using Json = nlohmann::ordered_json;

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

[[noreturn]] void fail(ModelError::Kind kind, const std::string& msg) { throw ModelError(kind, msg); }

[[noreturn]] void schema_error(const std::string& where, const std::string& msg) {
  fail(ModelError::Kind::Schema, where + ": " + msg);
}

void check_keys(const Json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      schema_error(where, "unknown key '" + key + "'");
  }
}

const Json& required(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing required key '") + key + "'");
  return *it;
}

std::string as_string(const Json& v, const std::string& where) {
  if (!v.is_string()) schema_error(where, "expected a string");
  return v.get<std::string>();
}

double as_real(const Json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where, "expected a number");
  return v.get<double>();
}

std::int64_t as_integer(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) schema_error(where, "expected an integer");
  return v.get<std::int64_t>();
}

TimeTick as_time(const Json& v, const std::string& where) {
  const auto us = as_integer(v, where);
  if (us < 0) schema_error(where, "time must be non-negative");
  return TimeTick{us};
}

std::vector<std::string> as_string_list(const Json& v, const std::string& where) {
  if (!v.is_array()) schema_error(where, "expected an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_string(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

double optional_real(const Json& obj, const char* key, double fallback, const std::string& where) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_real(*it, where + "." + key);
}

std::vector<std::string> default_labels(const char* prefix, std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 1; i <= n; ++i) labels.push_back(prefix + std::to_string(i));
  return labels;
}

BlockKind parse_kind(const std::string& kind, const Json& params, const std::string& where) {
  const std::string pw = where + ".params";
  if (kind == "Constant") {
    check_keys(params, {"value"}, pw);
    return blocks::Constant{as_real(required(params, "value", pw), pw + ".value")};
  }
  if (kind == "Gain") {
    check_keys(params, {"factor"}, pw);
    return blocks::Gain{as_real(required(params, "factor", pw), pw + ".factor")};
  }
  if (kind == "Sum") {
    check_keys(params, {"signs"}, pw);
    blocks::Sum sum;
    if (auto it = params.find("signs"); it != params.end()) sum.signs = as_string(*it, pw + ".signs");
    return sum;
  }
  if (kind == "UnitDelay") {
    check_keys(params, {"initial"}, pw);
    return blocks::UnitDelay{optional_real(params, "initial", 0.0, pw)};
  }
  if (kind == "DataStoreRead" || kind == "DataStoreWrite") {
    check_keys(params, {"store"}, pw);
    auto store = as_string(required(params, "store", pw), pw + ".store");
    if (kind == "DataStoreRead") return blocks::DataStoreRead{store};
    return blocks::DataStoreWrite{store};
  }
  if (kind == "Inport" || kind == "Outport") {
    std::int64_t index = 1;
    if (auto it = params.find("index"); it != params.end()) index = as_integer(*it, pw + ".index");
    if (index < 1) schema_error(pw + ".index", "port index must be >= 1");
    if (kind == "Inport") {
      check_keys(params, {"index", "signal"}, pw);
      return blocks::Inport{static_cast<int>(index), as_string(required(params, "signal", pw), pw + ".signal")};
    }
    check_keys(params, {"index", "signal"}, pw);
    blocks::Outport port{static_cast<int>(index), {}};
    if (auto it = params.find("signal"); it != params.end()) port.signal = as_string(*it, pw + ".signal");
    return port;
  }
  if (kind == "PidController") {
    check_keys(params, {"K", "Ti", "Td", "N", "h"}, pw);
    PidParams p;
    p.k = as_real(required(params, "K", pw), pw + ".K");
    if (auto it = params.find("Ti"); it != params.end() && !it->is_null()) p.ti = as_real(*it, pw + ".Ti");
    p.td = optional_real(params, "Td", 0.0, pw);
    p.n = optional_real(params, "N", 10.0, pw);
    p.h = optional_real(params, "h", 0.0, pw);
    return blocks::PidController{p};
  }
  if (kind == "PlantProbe" || kind == "PlantActuate") {
    check_keys(params, {"plant"}, pw);
    auto plant = as_string(required(params, "plant", pw), pw + ".plant");
    if (kind == "PlantProbe") return blocks::PlantProbe{plant};
    return blocks::PlantActuate{plant};
  }
  schema_error(where + ".kind", "unknown block kind '" + kind + "'");
}

Block parse_block(const Json& j, const std::string& where) {
  check_keys(j, {"id", "kind", "params", "inports", "outports"}, where);
  Block b;
  b.id = as_string(required(j, "id", where), where + ".id");
  const auto kind = as_string(required(j, "kind", where), where + ".kind");
  const Json empty = Json::object();
  auto pit = j.find("params");
  b.kind = parse_kind(kind, pit == j.end() ? empty : *pit, where);

  auto arity = expected_arity(b.kind);
  if (auto it = j.find("inports"); it != j.end()) {
    b.inports = as_string_list(*it, where + ".inports");
  } else {
    b.inports = default_labels("in", arity.inports);
  }
  if (auto it = j.find("outports"); it != j.end()) {
    b.outports = as_string_list(*it, where + ".outports");
  } else {
    b.outports = default_labels("out", arity.outports);
  }
  return b;
}

PortRef parse_port_ref(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) schema_error(where, "expected [block, port]");
  PortRef ref{as_string(j[0], where + "[0]"), static_cast<int>(as_integer(j[1], where + "[1]"))};
  if (ref.port < 1) schema_error(where, "port numbers are 1-based");
  return ref;
}

template <class T>
void check_unique(const std::vector<T>& items, const char* what) {
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (!seen.insert(item.id).second)
      fail(ModelError::Kind::DuplicateId, std::string("duplicate ") + what + " id '" + item.id + "'");
  }
}

[[noreturn]] void unknown_ref(const std::string& where, const std::string& what, const std::string& id) {
  fail(ModelError::Kind::UnknownReference, where + ": unknown " + what + " '" + id + "'");
}

std::string default_signal_name(const std::string& runnable, int index) {
  return index == 1 ? runnable + ".out" : runnable + ".out" + std::to_string(index);
}

std::string syntax_message(std::string_view text, std::size_t byte, const std::string& detail) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + detail;
}

void resolve(Model& m) {
  check_unique(m.blocks, "block");
  check_unique(m.runnables, "runnable");
  check_unique(m.tasks, "task");
  check_unique(m.plants, "plant");

  for (std::size_t i = 0; i < m.connections.size(); ++i) {
    const auto& c = m.connections[i];
    const std::string where = "connections[" + std::to_string(i) + "]";
    if (!m.find_block(c.src.block)) unknown_ref(where, "block", c.src.block);
    if (!m.find_block(c.dst.block)) unknown_ref(where, "block", c.dst.block);
  }
  for (auto& r : m.runnables) {
    for (const auto& b : r.blocks)
      if (!m.find_block(b)) unknown_ref("runnable " + r.id, "block", b);
    if (r.origin.empty()) r.origin = r.id;
  }
  for (const auto& t : m.tasks) {
    for (const auto& r : t.runnables)
      if (!m.find_runnable(r)) unknown_ref("task " + t.id, "runnable", r);
    for (const auto& p : t.prect)
      if (!m.find_task(p)) unknown_ref("task " + t.id + " prect", "task", p);
  }

  // Outports without an explicit signal are named after their runnable.
  std::map<std::string, std::string> owner;
  for (const auto& r : m.runnables)
    for (const auto& b : r.blocks) owner.emplace(b, r.origin);
  for (auto& b : m.blocks) {
    if (auto* port = std::get_if<blocks::Outport>(&b.kind); port && port->signal.empty()) {
      auto it = owner.find(b.id);
      port->signal = it == owner.end() ? b.id : default_signal_name(it->second, port->index);
    }
  }

  std::set<std::string> signals;
  for (const auto& s : output_signals(m)) signals.insert(s);
  for (const auto& b : m.blocks) {
    std::visit(Overloaded{
                   [&](const blocks::DataStoreRead& d) {
                     if (std::none_of(m.stores.begin(), m.stores.end(), [&](auto& s) { return s.first == d.store; }))
                       m.stores.emplace_back(d.store, 0.0);
                   },
                   [&](const blocks::DataStoreWrite& d) {
                     if (std::none_of(m.stores.begin(), m.stores.end(), [&](auto& s) { return s.first == d.store; }))
                       m.stores.emplace_back(d.store, 0.0);
                   },
                   [&](const blocks::Inport& p) {
                     if (!signals.contains(p.signal)) unknown_ref("block " + b.id, "signal", p.signal);
                   },
                   [&](const blocks::PlantProbe& p) {
                     if (!m.find_plant(p.plant)) unknown_ref("block " + b.id, "plant", p.plant);
                   },
                   [&](const blocks::PlantActuate& p) {
                     if (!m.find_plant(p.plant)) unknown_ref("block " + b.id, "plant", p.plant);
                   },
                   [](const auto&) {},
               },
               b.kind);
  }
}

Json params_json(const Block& b) {
  return std::visit(Overloaded{
                        [](const blocks::Constant& k) { return Json{{"value", k.value}}; },
                        [](const blocks::Gain& k) { return Json{{"factor", k.factor}}; },
                        [](const blocks::Sum& k) { return Json{{"signs", k.signs}}; },
                        [](const blocks::UnitDelay& k) { return Json{{"initial", k.initial}}; },
                        [](const blocks::DataStoreRead& k) { return Json{{"store", k.store}}; },
                        [](const blocks::DataStoreWrite& k) { return Json{{"store", k.store}}; },
                        [](const blocks::Inport& k) { return Json{{"index", k.index}, {"signal", k.signal}}; },
                        [](const blocks::Outport& k) { return Json{{"index", k.index}, {"signal", k.signal}}; },
                        [](const blocks::PidController& k) {
                          Json j = Json::object();
                          j["K"] = k.params.k;
                          if (std::isfinite(k.params.ti)) j["Ti"] = k.params.ti;
                          j["Td"] = k.params.td;
                          j["N"] = k.params.n;
                          j["h"] = k.params.h;
                          return j;
                        },
                        [](const blocks::PlantProbe& k) { return Json{{"plant", k.plant}}; },
                        [](const blocks::PlantActuate& k) { return Json{{"plant", k.plant}}; },
                    },
                    b.kind);
}

}  // namespace

std::string_view kind_name(const BlockKind& kind) {
  static constexpr std::string_view names[] = {"Constant",      "Gain",          "Sum",         "UnitDelay",
                                               "DataStoreRead", "DataStoreWrite", "Inport",      "Outport",
                                               "PidController", "PlantProbe",    "PlantActuate"};
  return names[kind.index()];
}

bool is_direct_feedthrough(const BlockKind& kind) {
  return std::holds_alternative<blocks::Gain>(kind) || std::holds_alternative<blocks::Sum>(kind) ||
         std::holds_alternative<blocks::DataStoreWrite>(kind) || std::holds_alternative<blocks::Outport>(kind) ||
         std::holds_alternative<blocks::PidController>(kind) || std::holds_alternative<blocks::PlantActuate>(kind);
}

bool is_boundary_port(const BlockKind& kind) {
  return std::holds_alternative<blocks::Inport>(kind) || std::holds_alternative<blocks::Outport>(kind);
}

PortArity expected_arity(const BlockKind& kind) {
  return std::visit(Overloaded{
                        [](const blocks::Constant&) { return PortArity{0, 1}; },
                        [](const blocks::Gain&) { return PortArity{1, 1}; },
                        [](const blocks::Sum& s) { return PortArity{s.signs.size(), 1}; },
                        [](const blocks::UnitDelay&) { return PortArity{1, 1}; },
                        [](const blocks::DataStoreRead&) { return PortArity{0, 1}; },
                        [](const blocks::DataStoreWrite&) { return PortArity{1, 0}; },
                        [](const blocks::Inport&) { return PortArity{0, 1}; },
                        [](const blocks::Outport&) { return PortArity{1, 0}; },
                        [](const blocks::PidController&) { return PortArity{1, 1}; },
                        [](const blocks::PlantProbe&) { return PortArity{0, 2}; },
                        [](const blocks::PlantActuate&) { return PortArity{1, 0}; },
                    },
                    kind);
}

const Block* Model::find_block(std::string_view id) const {
  auto i = block_index(id);
  return i ? &blocks[*i] : nullptr;
}

const Runnable* Model::find_runnable(std::string_view id) const {
  auto i = runnable_index(id);
  return i ? &runnables[*i] : nullptr;
}

const Task* Model::find_task(std::string_view id) const {
  auto i = task_index(id);
  return i ? &tasks[*i] : nullptr;
}

const PlantSpec* Model::find_plant(std::string_view id) const {
  for (const auto& p : plants)
    if (p.id == id) return &p;
  return nullptr;
}

namespace {
template <class T>
std::optional<std::size_t> index_of(const std::vector<T>& items, std::string_view id) {
  for (std::size_t i = 0; i < items.size(); ++i)
    if (items[i].id == id) return i;
  return std::nullopt;
}
}  // namespace

std::optional<std::size_t> Model::block_index(std::string_view id) const { return index_of(blocks, id); }
std::optional<std::size_t> Model::runnable_index(std::string_view id) const { return index_of(runnables, id); }
std::optional<std::size_t> Model::task_index(std::string_view id) const { return index_of(tasks, id); }

TimeTick Model::wcet(const Task& task) const {
  TimeTick c;
  for (const auto& r : task.runnables)
    if (const auto* run = find_runnable(r)) c += run->budget;
  return c;
}

Model parse_model(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    fail(ModelError::Kind::Syntax, syntax_message(text, e.byte, e.what()));
  }

  check_keys(root, {"blocks", "connections", "stores", "runnables", "tasks", "plants", "sim"}, "model");
  Model m;

  const auto& blocks_json = required(root, "blocks", "model");
  if (!blocks_json.is_array()) schema_error("blocks", "expected an array");
  for (std::size_t i = 0; i < blocks_json.size(); ++i)
    m.blocks.push_back(parse_block(blocks_json[i], "blocks[" + std::to_string(i) + "]"));

  if (auto it = root.find("connections"); it != root.end()) {
    if (!it->is_array()) schema_error("connections", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "connections[" + std::to_string(i) + "]";
      const auto& c = (*it)[i];
      check_keys(c, {"src", "dst"}, where);
      m.connections.push_back(
          {parse_port_ref(required(c, "src", where), where + ".src"), parse_port_ref(required(c, "dst", where), where + ".dst")});
    }
  }

  if (auto it = root.find("stores"); it != root.end()) {
    if (!it->is_object()) schema_error("stores", "expected an object");
    for (const auto& [name, value] : it->items()) m.stores.emplace_back(name, as_real(value, "stores." + name));
  }

  const auto& runnables_json = required(root, "runnables", "model");
  if (!runnables_json.is_array()) schema_error("runnables", "expected an array");
  for (std::size_t i = 0; i < runnables_json.size(); ++i) {
    const std::string where = "runnables[" + std::to_string(i) + "]";
    const auto& j = runnables_json[i];
    check_keys(j, {"id", "blocks", "budget_us", "atomic", "origin"}, where);
    Runnable r;
    r.id = as_string(required(j, "id", where), where + ".id");
    r.blocks = as_string_list(required(j, "blocks", where), where + ".blocks");
    r.budget = as_time(required(j, "budget_us", where), where + ".budget_us");
    if (auto a = j.find("atomic"); a != j.end()) {
      if (!a->is_boolean()) schema_error(where + ".atomic", "expected a boolean");
      r.atomic = a->get<bool>();
    }
    if (auto o = j.find("origin"); o != j.end()) r.origin = as_string(*o, where + ".origin");
    m.runnables.push_back(std::move(r));
  }

  const auto& tasks_json = required(root, "tasks", "model");
  if (!tasks_json.is_array()) schema_error("tasks", "expected an array");
  for (std::size_t i = 0; i < tasks_json.size(); ++i) {
    const std::string where = "tasks[" + std::to_string(i) + "]";
    const auto& j = tasks_json[i];
    check_keys(j, {"id", "period_us", "offset_us", "priority", "jitter_us", "runnables", "prect"}, where);
    Task t;
    t.id = as_string(required(j, "id", where), where + ".id");
    t.period = as_time(required(j, "period_us", where), where + ".period_us");
    if (auto o = j.find("offset_us"); o != j.end()) t.offset = as_time(*o, where + ".offset_us");
    t.priority = static_cast<int>(as_integer(required(j, "priority", where), where + ".priority"));
    if (auto o = j.find("jitter_us"); o != j.end()) t.jitter = as_time(*o, where + ".jitter_us");
    t.runnables = as_string_list(required(j, "runnables", where), where + ".runnables");
    if (auto o = j.find("prect"); o != j.end()) t.prect = as_string_list(*o, where + ".prect");
    m.tasks.push_back(std::move(t));
  }

  if (auto it = root.find("plants"); it != root.end()) {
    if (!it->is_array()) schema_error("plants", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "plants[" + std::to_string(i) + "]";
      const auto& j = (*it)[i];
      check_keys(j, {"id", "a", "b", "ref_amplitude", "ref_period_us", "x0", "v0"}, where);
      PlantSpec p;
      p.id = as_string(required(j, "id", where), where + ".id");
      p.a = optional_real(j, "a", p.a, where);
      p.b = optional_real(j, "b", p.b, where);
      p.ref_amplitude = optional_real(j, "ref_amplitude", p.ref_amplitude, where);
      if (auto o = j.find("ref_period_us"); o != j.end()) p.ref_period = as_time(*o, where + ".ref_period_us");
      p.x0 = optional_real(j, "x0", p.x0, where);
      p.v0 = optional_real(j, "v0", p.v0, where);
      m.plants.push_back(std::move(p));
    }
  }

  if (auto it = root.find("sim"); it != root.end()) {
    check_keys(*it, {"horizon_us", "seed"}, "sim");
    if (auto h = it->find("horizon_us"); h != it->end()) m.sim.horizon = as_time(*h, "sim.horizon_us");
    if (auto s = it->find("seed"); s != it->end()) {
      if (!s->is_number_unsigned() && !s->is_number_integer()) schema_error("sim.seed", "expected an integer");
      m.sim.seed = s->get<std::uint64_t>();
    }
  }

  resolve(m);
  return m;
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::string serialize_model(const Model& m) {
  Json root = Json::object();
  Json blocks_json = Json::array();
  for (const auto& b : m.blocks) {
    blocks_json.push_back(Json{{"id", b.id},
                               {"kind", std::string(kind_name(b.kind))},
                               {"params", params_json(b)},
                               {"inports", b.inports},
                               {"outports", b.outports}});
  }
  root["blocks"] = std::move(blocks_json);

  Json conns = Json::array();
  for (const auto& c : m.connections)
    conns.push_back(Json{{"src", Json::array({c.src.block, c.src.port})}, {"dst", Json::array({c.dst.block, c.dst.port})}});
  root["connections"] = std::move(conns);

  Json stores = Json::object();
  for (const auto& [name, value] : m.stores) stores[name] = value;
  root["stores"] = std::move(stores);

  Json runnables = Json::array();
  for (const auto& r : m.runnables) {
    Json j{{"id", r.id}, {"blocks", r.blocks}, {"budget_us", r.budget.us}};
    if (!r.atomic) j["atomic"] = false;
    if (r.origin != r.id) j["origin"] = r.origin;
    runnables.push_back(std::move(j));
  }
  root["runnables"] = std::move(runnables);

  Json tasks = Json::array();
  for (const auto& t : m.tasks) {
    tasks.push_back(Json{{"id", t.id},
                         {"period_us", t.period.us},
                         {"offset_us", t.offset.us},
                         {"priority", t.priority},
                         {"jitter_us", t.jitter.us},
                         {"runnables", t.runnables},
                         {"prect", t.prect}});
  }
  root["tasks"] = std::move(tasks);

  if (!m.plants.empty()) {
    Json plants = Json::array();
    for (const auto& p : m.plants) {
      plants.push_back(Json{{"id", p.id},
                            {"a", p.a},
                            {"b", p.b},
                            {"ref_amplitude", p.ref_amplitude},
                            {"ref_period_us", p.ref_period.us},
                            {"x0", p.x0},
                            {"v0", p.v0}});
    }
    root["plants"] = std::move(plants);
  }

  root["sim"] = Json{{"horizon_us", m.sim.horizon.us}, {"seed", m.sim.seed}};
  return root.dump(2) + "\n";
}

namespace {

void add(std::vector<Diagnostic>& out, Severity s, std::string code, std::string msg) {
  out.push_back({s, std::move(code), std::move(msg)});
}

// Returns one cycle of the prect graph, or empty.
std::vector<std::string> find_prect_cycle(const Model& m) {
  const auto n = m.tasks.size();
  std::vector<int> color(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::string> cycle;

  auto dfs = [&](auto&& self, std::size_t v) -> bool {
    color[v] = 1;
    stack.push_back(v);
    for (const auto& p : m.tasks[v].prect) {
      auto w = m.task_index(p);
      if (!w) continue;
      if (color[*w] == 1) {
        auto it = std::find(stack.begin(), stack.end(), *w);
        for (; it != stack.end(); ++it) cycle.push_back(m.tasks[*it].id);
        cycle.push_back(m.tasks[*w].id);
        return true;
      }
      if (color[*w] == 0 && self(self, *w)) return true;
    }
    stack.pop_back();
    color[v] = 2;
    return false;
  };
  for (std::size_t v = 0; v < n; ++v)
    if (color[v] == 0 && dfs(dfs, v)) break;
  return cycle;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

}  // namespace

std::vector<Diagnostic> validate(const Model& m) {
  std::vector<Diagnostic> out;
  constexpr auto E = Severity::Error;

  std::map<std::string, int> block_owners;
  for (const auto& r : m.runnables)
    for (const auto& b : r.blocks) ++block_owners[b];
  for (const auto& b : m.blocks) {
    const int owners = block_owners[b.id];
    if (owners == 0) add(out, E, "unassigned-block", "block " + b.id + " belongs to no runnable");
    if (owners > 1) add(out, E, "block-overlap", "block " + b.id + " belongs to " + std::to_string(owners) + " runnables");
  }

  std::map<std::string, int> runnable_tasks;
  for (const auto& t : m.tasks)
    for (const auto& r : t.runnables) ++runnable_tasks[r];
  for (const auto& r : m.runnables) {
    const int owners = runnable_tasks[r.id];
    if (owners == 0) add(out, E, "runnable-unmapped", "runnable " + r.id + " is mapped to no task");
    if (owners > 1) add(out, E, "runnable-multi-task", "runnable " + r.id + " is mapped " + std::to_string(owners) + " times");
    if (r.budget.us <= 0) add(out, E, "zero-budget", "runnable " + r.id + " has a zero budget");
  }

  for (const auto& t : m.tasks) {
    if (t.runnables.empty()) add(out, E, "empty-task", "task " + t.id + " has no runnables");
    if (t.period.us <= 0) add(out, E, "zero-period", "task " + t.id + " has a zero period");
  }

  for (const auto& b : m.blocks) {
    const auto arity = expected_arity(b.kind);
    if (const auto* sum = std::get_if<blocks::Sum>(&b.kind)) {
      if (sum->signs.size() < 2 || sum->signs.find_first_not_of("+-") != std::string::npos)
        add(out, E, "arity", "sum block " + b.id + " needs at least two '+'/'-' signs");
    }
    if (b.inports.size() != arity.inports || b.outports.size() != arity.outports) {
      add(out, E, "arity",
          "block " + b.id + " (" + std::string(kind_name(b.kind)) + ") expects " + std::to_string(arity.inports) +
              " inports and " + std::to_string(arity.outports) + " outports");
    }
    if (const auto* pid = std::get_if<blocks::PidController>(&b.kind)) {
      const auto& p = pid->params;
      if (!(p.k > 0 && p.ti > 0 && p.td >= 0 && p.n > 0 && p.h >= 0))
        add(out, E, "pid-params", "pid block " + b.id + " needs K>0, Ti>0, Td>=0, N>0, h>=0");
    }
  }

  std::map<std::pair<std::string, int>, int> drivers;
  for (const auto& c : m.connections) {
    const auto* src = m.find_block(c.src.block);
    const auto* dst = m.find_block(c.dst.block);
    if (!src || !dst) continue;
    if (static_cast<std::size_t>(c.src.port) > src->outports.size())
      add(out, E, "dangling-port", "connection from missing outport " + c.src.block + "." + std::to_string(c.src.port));
    if (static_cast<std::size_t>(c.dst.port) > dst->inports.size())
      add(out, E, "dangling-port", "connection to missing inport " + c.dst.block + "." + std::to_string(c.dst.port));
    ++drivers[{c.dst.block, c.dst.port}];
  }
  for (const auto& b : m.blocks) {
    for (std::size_t p = 1; p <= b.inports.size(); ++p) {
      const int count = drivers[{b.id, static_cast<int>(p)}];
      if (count == 0) add(out, E, "dangling-port", "inport " + b.id + "." + std::to_string(p) + " is unconnected");
      if (count > 1) add(out, E, "multiple-drivers", "inport " + b.id + "." + std::to_string(p) + " has " + std::to_string(count) + " drivers");
    }
  }

  std::map<std::string, int> signal_writers;
  for (const auto& s : output_signals(m)) ++signal_writers[s];
  for (const auto& [signal, count] : signal_writers)
    if (count > 1) add(out, E, "duplicate-signal", "signal " + signal + " is written by " + std::to_string(count) + " outports");

  if (auto cycle = find_prect_cycle(m); !cycle.empty())
    add(out, E, "prect-cycle", "prect cycle " + join(cycle, " -> "));

  for (const auto& r : m.runnables) {
    try {
      (void)sorted_order(runnable_graph(m, r));
    } catch (const AlgebraicLoopError& e) {
      add(out, E, "algebraic-loop", "runnable " + r.id + ": " + e.what());
    }
  }

  const double u = utilization(m);
  if (u > 1.0) {
    std::ostringstream msg;
    msg << "utilization " << u << " exceeds 1";
    add(out, Severity::Warning, "utilization", msg.str());
  }
  for (const auto& t : m.tasks) {
    if (t.period.us > 0 && m.wcet(t) > t.period)
      add(out, Severity::Warning, "overload-task",
          "task " + t.id + " wcet " + format_duration(m.wcet(t)) + " exceeds its period " + format_duration(t.period));
  }
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

void require_valid(const Model& m) {
  const auto diags = validate(m);
  std::vector<std::string> errors;
  for (const auto& d : diags)
    if (d.severity == Severity::Error) errors.push_back(d.message);
  if (!errors.empty()) fail(ModelError::Kind::Invalid, "invalid model: " + join(errors, "; "));
}

double utilization(const Model& m) {
  double u = 0.0;
  for (const auto& t : m.tasks)
    if (t.period.us > 0) u += static_cast<double>(m.wcet(t).us) / static_cast<double>(t.period.us);
  return u;
}

TimeTick hyperperiod(const Model& m) {
  std::int64_t h = 1;
  for (const auto& t : m.tasks)
    if (t.period.us > 0) h = std::lcm(h, t.period.us);
  return TimeTick{m.tasks.empty() ? 0 : h};
}

std::vector<std::string> output_signals(const Model& m) {
  std::vector<std::string> out;
  for (const auto& b : m.blocks)
    if (const auto* port = std::get_if<blocks::Outport>(&b.kind)) out.push_back(port->signal);
  return out;
}

}  // namespace runsched
