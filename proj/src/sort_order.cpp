#include "runsched/sort_order.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace runsched {

BlockGraph runnable_graph(const Model& m, const Runnable& r) {
  const std::set<std::string> members(r.blocks.begin(), r.blocks.end());
  BlockGraph g;
  for (const auto& b : m.blocks)
    if (members.contains(b.id)) g.blocks.push_back(b);
  for (const auto& c : m.connections)
    if (members.contains(c.src.block) && members.contains(c.dst.block)) g.connections.push_back(c);
  return g;
}

std::vector<Edge> feedthrough_edges(const BlockGraph& g) {
  std::map<std::string, const Block*> by_id;
  for (const auto& b : g.blocks) by_id.emplace(b.id, &b);

  std::vector<Edge> edges;
  std::set<Edge> seen;
  for (const auto& c : g.connections) {
    auto src = by_id.find(c.src.block);
    auto dst = by_id.find(c.dst.block);
    if (src == by_id.end() || dst == by_id.end()) continue;
    if (!is_direct_feedthrough(dst->second->kind)) continue;
    Edge e{c.src.block, c.dst.block};
    if (seen.insert(e).second) edges.push_back(std::move(e));
  }
  return edges;
}

std::string SortedOrder::label(std::size_t i) const {
  return std::to_string(context) + ":" + std::to_string(entries.at(i).position);
}

int SortedOrder::position_of(const std::string& block) const {
  for (const auto& e : entries)
    if (e.block == block) return e.position;
  return -1;
}

SortedOrder sorted_order(const BlockGraph& g, int context) {
  std::vector<std::string> nodes;
  std::map<std::string, std::size_t> rank;
  for (const auto& b : g.blocks) {
    if (is_boundary_port(b.kind)) continue;
    rank.emplace(b.id, nodes.size());
    nodes.push_back(b.id);
  }

  std::vector<std::vector<std::size_t>> succ(nodes.size());
  std::vector<int> indegree(nodes.size(), 0);
  for (const auto& [a, b] : feedthrough_edges(g)) {
    auto ia = rank.find(a);
    auto ib = rank.find(b);
    if (ia == rank.end() || ib == rank.end()) continue;
    succ[ia->second].push_back(ib->second);
    ++indegree[ib->second];
  }

  // Kahn's algorithm; the ready set is ordered by declaration rank.
  SortedOrder order{context, {}};
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (indegree[i] == 0) ready.insert(i);
  while (!ready.empty()) {
    const auto v = *ready.begin();
    ready.erase(ready.begin());
    order.entries.push_back({nodes[v], static_cast<int>(order.entries.size())});
    for (auto w : succ[v])
      if (--indegree[w] == 0) ready.insert(w);
  }
  if (order.entries.size() == nodes.size()) return order;

  // Every leftover node has a leftover predecessor, so walking predecessors
  // backwards from any of them must revisit a node.
  std::vector<std::vector<std::size_t>> pred(nodes.size());
  for (std::size_t v = 0; v < nodes.size(); ++v)
    for (auto w : succ[v])
      if (indegree[v] > 0 && indegree[w] > 0) pred[w].push_back(v);
  std::size_t v = 0;
  while (indegree[v] == 0) ++v;
  std::vector<std::size_t> walk;
  std::vector<int> seen_at(nodes.size(), -1);
  while (seen_at[v] < 0) {
    seen_at[v] = static_cast<int>(walk.size());
    walk.push_back(v);
    v = pred[v].front();
  }
  std::vector<std::string> cycle;
  for (auto i = walk.size(); i-- > static_cast<std::size_t>(seen_at[v]);) cycle.push_back(nodes[walk[i]]);
  cycle.push_back(cycle.front());

  std::string msg = "algebraic loop";
  for (std::size_t i = 0; i < cycle.size(); ++i) msg += (i ? " -> " : ": ") + cycle[i];
  throw AlgebraicLoopError(std::move(cycle), msg);
}

std::vector<SortedOrder> model_sorted_orders(const Model& m) {
  std::vector<SortedOrder> out;
  for (std::size_t i = 0; i < m.runnables.size(); ++i)
    out.push_back(sorted_order(runnable_graph(m, m.runnables[i]), static_cast<int>(i + 1)));
  return out;
}

}  // namespace runsched
