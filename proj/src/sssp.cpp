#include "gnnsde/sssp.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <ostream>
#include <queue>
#include <utility>

#include "gnnsde/error.hpp"
#include "text_util.hpp"

namespace gnnsde {

namespace {

void check_source(const Graph& graph, NodeId source) {
  if (source >= graph.node_count()) {
    throw ValidationError("source " + std::to_string(source) + " out of range for graph with " +
                          std::to_string(graph.node_count()) + " nodes");
  }
}

}  // namespace

SsspResult dijkstra(const Graph& graph, NodeId source, Direction direction) {
  check_source(graph, source);
  const auto n = graph.node_count();
  SsspResult result{source, std::vector<double>(n, kInf), std::vector<NodeId>(n, kNoNode)};
  std::vector<bool> settled(n, false);

  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  result.dist[source] = 0.0;
  heap.push({0.0, source});

  auto relax = [&](NodeId u, NodeId v, double w) {
    const double candidate = result.dist[u] + w;
    if (candidate < result.dist[v]) {
      result.dist[v] = candidate;
      result.pred[v] = u;
      heap.push({candidate, v});
    }
  };

  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (settled[u] || d > result.dist[u]) continue;
    settled[u] = true;
    if (direction == Direction::Forward) {
      for (const auto& e : graph.out_edges(u)) {
        if (!settled[e.to]) relax(u, e.to, e.weight);
      }
    } else {
      for (EdgeId id : graph.in_edges(u)) {
        const auto& e = graph.edge(id);
        if (!settled[e.from]) relax(u, e.from, e.weight);
      }
    }
  }
  return result;
}

SsspResult bellman_ford(const Graph& graph, NodeId source) {
  check_source(graph, source);
  const auto n = graph.node_count();
  SsspResult result{source, std::vector<double>(n, kInf), std::vector<NodeId>(n, kNoNode)};
  result.dist[source] = 0.0;
  for (std::size_t round = 0; round + 1 < std::max<std::size_t>(n, 2); ++round) {
    bool changed = false;
    for (const auto& e : graph.edges()) {
      if (result.dist[e.from] == kInf) continue;
      const double candidate = result.dist[e.from] + e.weight;
      if (candidate < result.dist[e.to]) {
        result.dist[e.to] = candidate;
        result.pred[e.to] = e.from;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return result;
}

std::vector<std::uint32_t> bfs_hops(const Graph& graph, NodeId source) {
  check_source(graph, source);
  std::vector<std::uint32_t> hops(graph.node_count(), kUnreachableHops);
  std::deque<NodeId> frontier{source};
  hops[source] = 0;
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    for (const auto& e : graph.out_edges(u)) {
      if (hops[e.to] == kUnreachableHops) {
        hops[e.to] = hops[u] + 1;
        frontier.push_back(e.to);
      }
    }
  }
  return hops;
}

std::vector<NodeId> shortest_path(const SsspResult& result, NodeId target) {
  if (target >= result.dist.size() || !result.reachable(target)) return {};
  std::vector<NodeId> path{target};
  while (path.back() != result.source) path.push_back(result.pred[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

void write_sssp_csv_rows(std::ostream& out, const SsspResult& result, std::span<const std::uint32_t> hops) {
  if (hops.size() != result.dist.size()) throw ValidationError("hop array length mismatch");
  for (NodeId v = 0; v < result.dist.size(); ++v) {
    out << result.source << ',' << v << ',';
    if (result.reachable(v)) {
      out << detail::format_exact(result.dist[v]) << ',';
    } else {
      out << "inf,";
    }
    if (result.pred[v] == kNoNode) {
      out << "-1,";
    } else {
      out << result.pred[v] << ',';
    }
    if (hops[v] == kUnreachableHops) {
      out << "-1\n";
    } else {
      out << hops[v] << '\n';
    }
  }
}

}  // namespace gnnsde
