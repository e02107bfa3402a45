#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "gnnsde/graph.hpp"

namespace gnnsde {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr std::uint32_t kUnreachableHops = std::numeric_limits<std::uint32_t>::max();

/// Which adjacency a search expands. Reverse computes distances *to* the
/// source (node -> source) by walking incoming edges.
enum class Direction { Forward, Reverse };

struct SsspResult {
  NodeId source = 0;
  std::vector<double> dist;  // kInf when unreachable
  std::vector<NodeId> pred;  // kNoNode for the source and unreachable nodes

  bool reachable(NodeId v) const { return dist[v] != kInf; }
};

/// Binary-heap Dijkstra with lazy deletion. Equal keys pop in NodeId order.
/// In reverse mode pred[v] is the next hop from v towards the source.
SsspResult dijkstra(const Graph& graph, NodeId source, Direction direction = Direction::Forward);

/// Label-correcting reference solver, O(|V||E|).
SsspResult bellman_ford(const Graph& graph, NodeId source);

/// Minimum edge count from source over out-edges, kUnreachableHops if none.
std::vector<std::uint32_t> bfs_hops(const Graph& graph, NodeId source);

/// Walks pred from target back to the source. Empty if target is unreachable.
std::vector<NodeId> shortest_path(const SsspResult& result, NodeId target);

// Ground-truth CSV: "source,node,dist,pred,hops". Distances use 17
// significant digits; unreachable rows print dist=inf, pred=-1, hops=-1 and
// the source prints pred=-1.
inline constexpr const char* kSsspCsvHeader = "source,node,dist,pred,hops";
void write_sssp_csv_rows(std::ostream& out, const SsspResult& result, std::span<const std::uint32_t> hops);

}  // namespace gnnsde
