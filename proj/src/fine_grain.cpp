#include "runsched/fine_grain.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace runsched {

std::vector<TimeTick> exec_time_split(TimeTick c, std::size_t n) {
  if (n == 0) throw std::invalid_argument("exec_time_split: share count must be >= 1");
  const auto count = static_cast<std::int64_t>(n);
  std::vector<TimeTick> shares(n, TimeTick{c.us / count});
  shares.back() += TimeTick{c.us % count};
  return shares;
}

SplitResult split_runnable(const Runnable& r, const BlockGraph& g, const SortedOrder& order) {
  if (order.entries.empty())
    throw ModelError(ModelError::Kind::Invalid, "runnable " + r.id + " has no block to split");

  const auto budgets = exec_time_split(r.budget, order.entries.size());
  const std::string origin = r.origin.empty() ? r.id : r.origin;

  SplitResult result;
  std::map<std::string, std::size_t> holder;  // block id -> sub-runnable index
  for (std::size_t i = 0; i < order.entries.size(); ++i) {
    const auto& entry = order.entries[i];
    Runnable sub;
    sub.id = r.id + "_" + std::to_string(entry.position + 1);
    sub.budget = budgets[i];
    sub.atomic = false;
    sub.origin = origin;
    holder.emplace(entry.block, i);
    result.subrunnables.push_back(std::move(sub));
  }

  // Inports travel with their earliest consumer, Outports with their driver.
  for (const auto& b : g.blocks) {
    if (!std::holds_alternative<blocks::Inport>(b.kind)) continue;
    std::size_t best = 0;
    int best_pos = -1;
    for (const auto& c : g.connections) {
      if (c.src.block != b.id) continue;
      auto it = holder.find(c.dst.block);
      if (it == holder.end()) continue;
      const int pos = order.entries[it->second].position;
      if (best_pos < 0 || pos < best_pos) {
        best_pos = pos;
        best = it->second;
      }
    }
    holder.emplace(b.id, best);
  }
  for (const auto& b : g.blocks) {
    if (!std::holds_alternative<blocks::Outport>(b.kind)) continue;
    std::size_t target = 0;
    for (const auto& c : g.connections) {
      if (c.dst.block != b.id) continue;
      if (auto it = holder.find(c.src.block); it != holder.end()) target = it->second;
    }
    holder.emplace(b.id, target);
  }
  for (const auto& b : g.blocks) result.subrunnables[holder.at(b.id)].blocks.push_back(b.id);

  for (std::size_t i = 0; i < order.entries.size(); ++i) {
    const auto& entry = order.entries[i];
    ConnectivityRecord rec;
    rec.block = entry.block;
    rec.handle = result.subrunnables[i].id;
    rec.order = entry.position;
    for (const auto& c : g.connections) {
      if (c.dst.block == entry.block) rec.inbound.push_back({c.dst.port, c.src});
      if (c.src.block == entry.block) rec.outbound.push_back({c.src.port, c.dst});
    }
    std::stable_sort(rec.inbound.begin(), rec.inbound.end(), [](auto& a, auto& b) { return a.inport < b.inport; });
    std::stable_sort(rec.outbound.begin(), rec.outbound.end(), [](auto& a, auto& b) { return a.outport < b.outport; });
    result.connectivity.push_back(std::move(rec));
  }
  return result;
}

Model split_model(const Model& m, std::vector<ConnectivityRecord>& connectivity) {
  Model out = m;
  out.runnables.clear();
  std::map<std::string, std::vector<std::string>> replaced;
  for (const auto& r : m.runnables) {
    const auto g = runnable_graph(m, r);
    auto split = split_runnable(r, g, sorted_order(g));
    auto& ids = replaced[r.id];
    for (auto& sub : split.subrunnables) {
      ids.push_back(sub.id);
      out.runnables.push_back(std::move(sub));
    }
    for (auto& rec : split.connectivity) connectivity.push_back(std::move(rec));
  }
  for (auto& t : out.tasks) {
    std::vector<std::string> order;
    for (const auto& r : t.runnables) {
      const auto& subs = replaced.at(r);
      order.insert(order.end(), subs.begin(), subs.end());
    }
    t.runnables = std::move(order);
  }
  return out;
}

Model split_model(const Model& m) {
  std::vector<ConnectivityRecord> unused;
  return split_model(m, unused);
}

std::string connectivity_csv(const std::vector<ConnectivityRecord>& records) {
  std::string out = "block,handle,inport,outport\n";
  for (const auto& rec : records) {
    const auto rows = std::max<std::size_t>({1, rec.inbound.size(), rec.outbound.size()});
    for (std::size_t i = 0; i < rows; ++i) {
      out += rec.block + "," + rec.handle + ",";
      if (i < rec.inbound.size()) {
        const auto& in = rec.inbound[i];
        out += std::to_string(in.inport) + ":" + in.source.block + ".out" + std::to_string(in.source.port);
      }
      out += ",";
      if (i < rec.outbound.size()) {
        const auto& o = rec.outbound[i];
        out += std::to_string(o.outport) + ":" + o.destination.block + ".in" + std::to_string(o.destination.port);
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace runsched
