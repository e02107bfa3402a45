#include "gnnsde/pathfinder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gnnsde/error.hpp"
#include "gnnsde/sssp.hpp"

namespace gnnsde {

PredecessorMode parse_predecessor_mode(std::string_view name) {
  if (name == "faithful") return PredecessorMode::Faithful;
  if (name == "consistent") return PredecessorMode::Consistent;
  throw ValidationError("unknown predecessor mode '" + std::string(name) + "'");
}

std::string_view to_string(PredecessorMode mode) {
  return mode == PredecessorMode::Faithful ? "faithful" : "consistent";
}

PredecessorMap compute_predecessors(const Graph& graph, std::span<const double> dist, NodeId source,
                                    PredecessorMode mode) {
  const auto n = graph.node_count();
  if (dist.size() != n) throw ValidationError("distance field length does not match the graph");
  if (source >= n) throw ValidationError("source out of range");
  PredecessorMap map{source, mode, std::vector<NodeId>(n, kNoNode)};
  for (NodeId v = 0; v < n; ++v) {
    if (v == source) continue;
    double best = kInf;
    NodeId best_u = kNoNode;
    // in_edges are ordered by source id, so strict '<' keeps the smaller id on ties.
    for (EdgeId id : graph.in_edges(v)) {
      const auto& e = graph.edge(id);
      if (!std::isfinite(dist[e.from])) continue;
      const double key = mode == PredecessorMode::Faithful ? dist[e.from] : dist[e.from] + e.weight;
      if (key < best) {
        best = key;
        best_u = e.from;
      }
    }
    map.pred[v] = best_u;
  }
  return map;
}

std::vector<NodeId> reconstruct_path(const PredecessorMap& pred, NodeId s, NodeId t) {
  const auto n = pred.pred.size();
  if (s >= n || t >= n) throw ValidationError("route endpoint out of range");
  if (s != pred.source) throw ValidationError("predecessor map was built for another source");
  std::vector<NodeId> path{t};
  std::vector<bool> visited(n, false);
  visited[t] = true;
  NodeId current = t;
  while (current != s) {
    const NodeId next = pred.pred[current];
    if (next == kNoNode) {
      throw UnreachableError("node " + std::to_string(current) + " has no predecessor on the way from " +
                             std::to_string(t) + " to " + std::to_string(s));
    }
    if (visited[next] || path.size() > n) {
      throw RoutingError(next, "predecessor cycle through node " + std::to_string(next));
    }
    visited[next] = true;
    path.push_back(next);
    current = next;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

double path_weight(const Graph& graph, std::span<const NodeId> path) {
  const auto cumulative = cumulative_weights(graph, path);
  return cumulative.empty() ? 0.0 : cumulative.back();
}

std::vector<double> cumulative_weights(const Graph& graph, std::span<const NodeId> path) {
  std::vector<double> out;
  out.reserve(path.size());
  double total = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] >= graph.node_count()) throw ValidationError("path node out of range");
    if (i > 0) {
      double hop = kInf;
      for (const auto& e : graph.out_edges(path[i - 1])) {
        if (e.to == path[i]) hop = std::min(hop, e.weight);
      }
      if (hop == kInf) {
        throw ValidationError("no edge " + std::to_string(path[i - 1]) + "->" + std::to_string(path[i]));
      }
      total += hop;
    }
    out.push_back(total);
  }
  return out;
}

Route route_from_field(const Graph& graph, std::span<const double> dist, NodeId s, NodeId t, PredecessorMode mode) {
  const auto pred = compute_predecessors(graph, dist, s, mode);
  return Route{reconstruct_path(pred, s, t), dist[t]};
}

Route recommend_route(const Graph& graph, const ModelParams& params, NodeId s, NodeId t, PredecessorMode mode) {
  const auto dist = predict_sssd(graph, s, params);
  return route_from_field(graph, dist, s, t, mode);
}

}  // namespace gnnsde
