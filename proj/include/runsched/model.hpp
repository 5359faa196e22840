#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "runsched/time.hpp"

namespace runsched {

/// Discrete PID parameters. Times are in seconds. An infinite integral time
/// disables the integral term; h == 0 means "use the owning task's period".
struct PidParams {
  double k = 1.0;
  double ti = std::numeric_limits<double>::infinity();
  double td = 0.0;
  double n = 10.0;
  double h = 0.0;

  friend bool operator==(const PidParams&, const PidParams&) = default;
};

namespace blocks {

struct Constant {
  double value = 0.0;
  friend bool operator==(const Constant&, const Constant&) = default;
};
struct Gain {
  double factor = 1.0;
  friend bool operator==(const Gain&, const Gain&) = default;
};
// One sign character ('+' or '-') per inport.
struct Sum {
  std::string signs = "++";
  friend bool operator==(const Sum&, const Sum&) = default;
};
struct UnitDelay {
  double initial = 0.0;
  friend bool operator==(const UnitDelay&, const UnitDelay&) = default;
};
struct DataStoreRead {
  std::string store;
  friend bool operator==(const DataStoreRead&, const DataStoreRead&) = default;
};
struct DataStoreWrite {
  std::string store;
  friend bool operator==(const DataStoreWrite&, const DataStoreWrite&) = default;
};
// Boundary input of a runnable; yields the last committed value of `signal`.
struct Inport {
  int index = 1;
  std::string signal;
  friend bool operator==(const Inport&, const Inport&) = default;
};
// Boundary output of a runnable; every commit is appended to the `signal` log.
struct Outport {
  int index = 1;
  std::string signal;
  friend bool operator==(const Outport&, const Outport&) = default;
};
struct PidController {
  PidParams params;
  friend bool operator==(const PidController&, const PidController&) = default;
};
// Outport 1 is the plant reference, outport 2 the measured position.
struct PlantProbe {
  std::string plant;
  friend bool operator==(const PlantProbe&, const PlantProbe&) = default;
};
struct PlantActuate {
  std::string plant;
  friend bool operator==(const PlantActuate&, const PlantActuate&) = default;
};

}  // namespace blocks

using BlockKind = std::variant<blocks::Constant, blocks::Gain, blocks::Sum, blocks::UnitDelay,
                               blocks::DataStoreRead, blocks::DataStoreWrite, blocks::Inport,
                               blocks::Outport, blocks::PidController, blocks::PlantProbe,
                               blocks::PlantActuate>;

std::string_view kind_name(const BlockKind& kind);

/// Output depends on the current input (Gain, Sum, DataStoreWrite, Outport,
/// PidController, PlantActuate).
bool is_direct_feedthrough(const BlockKind& kind);

/// Inport/Outport: runnable boundary ports, excluded from sorted order.
bool is_boundary_port(const BlockKind& kind);

struct PortArity {
  std::size_t inports = 0;
  std::size_t outports = 0;
};
PortArity expected_arity(const BlockKind& kind);

struct Block {
  std::string id;
  BlockKind kind;
  std::vector<std::string> inports;   // port labels, one per input
  std::vector<std::string> outports;  // port labels, one per output

  friend bool operator==(const Block&, const Block&) = default;
};

/// Port numbers are 1-based, as in the model file.
struct PortRef {
  std::string block;
  int port = 1;
  friend bool operator==(const PortRef&, const PortRef&) = default;
};

struct Connection {
  PortRef src;
  PortRef dst;
  friend bool operator==(const Connection&, const Connection&) = default;
};

struct Runnable {
  std::string id;
  std::vector<std::string> blocks;
  TimeTick budget;
  // False for sub-runnables produced by the fine-grain split.
  bool atomic = true;
  // Runnable this one was split from (its own id when unsplit). Unit delays
  // update once the last runnable of their origin group has executed.
  std::string origin;

  friend bool operator==(const Runnable&, const Runnable&) = default;
};

struct Task {
  std::string id;
  TimeTick period;
  TimeTick offset;
  int priority = 0;  // larger value = higher priority
  TimeTick jitter;
  std::vector<std::string> runnables;  // execution order within a job
  std::vector<std::string> prect;      // predecessor tasks

  friend bool operator==(const Task&, const Task&) = default;
};

/// DC servo G(s) = b / (s^2 + a s) tracking a +/-amplitude square wave.
struct PlantSpec {
  std::string id;
  double a = 1.0;
  double b = 1000.0;
  double ref_amplitude = 1.0;
  TimeTick ref_period{180000};
  double x0 = 0.0;
  double v0 = 0.0;

  friend bool operator==(const PlantSpec&, const PlantSpec&) = default;
};

struct SimConfig {
  TimeTick horizon;
  std::uint64_t seed = 0;
  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct Model {
  std::vector<Block> blocks;
  std::vector<Connection> connections;
  std::vector<std::pair<std::string, double>> stores;
  std::vector<Runnable> runnables;
  std::vector<Task> tasks;
  std::vector<PlantSpec> plants;
  SimConfig sim;

  friend bool operator==(const Model&, const Model&) = default;

  const Block* find_block(std::string_view id) const;
  const Runnable* find_runnable(std::string_view id) const;
  const Task* find_task(std::string_view id) const;
  const PlantSpec* find_plant(std::string_view id) const;
  std::optional<std::size_t> block_index(std::string_view id) const;
  std::optional<std::size_t> runnable_index(std::string_view id) const;
  std::optional<std::size_t> task_index(std::string_view id) const;

  /// Task WCET: sum of its runnables' budgets.
  TimeTick wcet(const Task& task) const;
};

class ModelError : public std::runtime_error {
 public:
  enum class Kind { Syntax, Schema, UnknownReference, DuplicateId, Invalid };

  ModelError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Parses the JSON model file. Optional fields take their defaults
/// (offset 0, jitter 0, store initial 0, delay initial 0).
Model parse_model(std::string_view text);
Model load_model(const std::string& path);

/// Canonical JSON rendering; parse_model(serialize_model(m)) == m.
std::string serialize_model(const Model& m);

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity;
  std::string code;
  std::string message;
};

std::vector<Diagnostic> validate(const Model& m);
bool has_errors(const std::vector<Diagnostic>& diags);

/// Throws ModelError(Invalid) listing every ERROR diagnostic, if any.
void require_valid(const Model& m);

double utilization(const Model& m);
TimeTick hyperperiod(const Model& m);

/// Signals written by the model's Outport blocks, in block declaration order.
std::vector<std::string> output_signals(const Model& m);

}  // namespace runsched
