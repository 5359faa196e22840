#pragma once

#include <string>

#include "runsched/model.hpp"

namespace fixtures {

inline std::string path(const std::string& name) { return std::string(RUNSCHED_MODELS_DIR) + "/" + name; }

inline runsched::Model load(const std::string& name) { return runsched::load_model(path(name + ".json")); }

inline const char* kMinimal = R"({
  "blocks": [
    {"id": "C", "kind": "Constant", "params": {"value": 4}},
    {"id": "O", "kind": "Outport"}
  ],
  "connections": [{"src": ["C", 1], "dst": ["O", 1]}],
  "runnables": [{"id": "R", "blocks": ["C", "O"], "budget_us": 1000}],
  "tasks": [{"id": "T", "period_us": 5000, "priority": 1, "runnables": ["R"]}]
})";

}  // namespace fixtures
