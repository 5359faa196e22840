#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "runsched/model.hpp"

namespace runsched {

/// A set of blocks with the connections among them. Block order is the
/// declaration order used to break ties in the sorted order.
struct BlockGraph {
  std::vector<Block> blocks;
  std::vector<Connection> connections;
};

/// Graph of one runnable: its blocks in model declaration order and the
/// connections whose both ends lie inside it.
BlockGraph runnable_graph(const Model& m, const Runnable& r);

using Edge = std::pair<std::string, std::string>;

/// a -> b when a drives a direct-feedthrough input of b. Inputs of state
/// blocks (UnitDelay) produce no edge.
std::vector<Edge> feedthrough_edges(const BlockGraph& g);

struct SortedEntry {
  std::string block;
  int position = 0;
  friend bool operator==(const SortedEntry&, const SortedEntry&) = default;
};

struct SortedOrder {
  int context = 0;
  std::vector<SortedEntry> entries;

  std::string label(std::size_t i) const;
  int position_of(const std::string& block) const;  // -1 when absent
  friend bool operator==(const SortedOrder&, const SortedOrder&) = default;
};

class AlgebraicLoopError : public std::runtime_error {
 public:
  AlgebraicLoopError(std::vector<std::string> cycle, const std::string& what)
      : std::runtime_error(what), cycle_(std::move(cycle)) {}
  const std::vector<std::string>& cycle() const noexcept { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

/// Topological order of the non-port blocks of `g`, earliest-declared first
/// among ready blocks. Throws AlgebraicLoopError on a feedthrough cycle.
SortedOrder sorted_order(const BlockGraph& g, int context = 0);

/// One SortedOrder per runnable; context k is the k-th runnable (1-based).
std::vector<SortedOrder> model_sorted_orders(const Model& m);

}  // namespace runsched
