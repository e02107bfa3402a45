#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "gnnsde/graph.hpp"
#include "gnnsde/model.hpp"

namespace gnnsde {

/// Faithful: predecessor of v is the in-neighbor u with the smallest dist[u].
/// Consistent: the in-neighbor minimizing dist[u] + w(u, v), which recovers
/// a shortest-path tree when dist is exact.
enum class PredecessorMode { Faithful, Consistent };

PredecessorMode parse_predecessor_mode(std::string_view name);
std::string_view to_string(PredecessorMode mode);

struct PredecessorMap {
  NodeId source = 0;
  PredecessorMode mode = PredecessorMode::Consistent;
  std::vector<NodeId> pred;  // kNoNode for the source and for nodes without a finite in-neighbor
};

/// Ties go to the smaller NodeId. In-neighbors with non-finite dist are skipped.
PredecessorMap compute_predecessors(const Graph& graph, std::span<const double> dist, NodeId source,
                                    PredecessorMode mode);

/// Follows predecessors from t back to the map's source. Throws
/// UnreachableError when a node on the walk has no predecessor and
/// RoutingError when a node repeats (or the walk exceeds |V| steps).
std::vector<NodeId> reconstruct_path(const PredecessorMap& pred, NodeId s, NodeId t);

/// Cheapest parallel edge between consecutive nodes; throws ValidationError
/// if some consecutive pair is not an edge.
double path_weight(const Graph& graph, std::span<const NodeId> path);
/// Running total of path_weight, starting at 0 for the first node.
std::vector<double> cumulative_weights(const Graph& graph, std::span<const NodeId> path);

struct Route {
  std::vector<NodeId> nodes;
  double estimated_distance = 0.0;  // dist[t] of the field the route came from
};

/// Route from any single-source distance field (model estimate, landmark
/// estimate or exact distances).
Route route_from_field(const Graph& graph, std::span<const double> dist, NodeId s, NodeId t, PredecessorMode mode);

/// Predicts distances from s with the model, then reconstructs the route.
Route recommend_route(const Graph& graph, const ModelParams& params, NodeId s, NodeId t,
                      PredecessorMode mode = PredecessorMode::Consistent);

}  // namespace gnnsde
