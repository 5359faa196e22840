#pragma once

#include <string>
#include <vector>

#include "runsched/model.hpp"
#include "runsched/sort_order.hpp"

namespace runsched {

struct InboundLink {
  int inport = 1;
  PortRef source;
};

struct OutboundLink {
  int outport = 1;
  PortRef destination;
};

/// One row group of the connectivity table built while splitting.
struct ConnectivityRecord {
  std::string block;
  std::string handle;  // id of the sub-runnable that now holds the block
  int order = 0;       // sorted-order position in the original runnable
  std::vector<InboundLink> inbound;
  std::vector<OutboundLink> outbound;
};

struct SplitResult {
  std::vector<Runnable> subrunnables;
  std::vector<ConnectivityRecord> connectivity;
};

/// Equal shares floor(c/n), with c mod n added to the last share.
std::vector<TimeTick> exec_time_split(TimeTick c, std::size_t n);

/// One sub-runnable per non-port block, named "<id>_<k>" with k the 1-based
/// sorted position. Boundary ports ride along with the sub-runnable of the
/// block they attach to. Throws ModelError(Invalid) for runnables with no
/// non-port block.
SplitResult split_runnable(const Runnable& r, const BlockGraph& g, const SortedOrder& order);

/// Replaces every runnable of `m` with its sub-runnables, keeping the
/// per-task execution order and all task parameters.
Model split_model(const Model& m);

/// Same as split_model, also returning the connectivity table of every split.
Model split_model(const Model& m, std::vector<ConnectivityRecord>& connectivity);

/// CSV with header "block,handle,inport,outport".
std::string connectivity_csv(const std::vector<ConnectivityRecord>& records);

}  // namespace runsched
