#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gnnsde {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  double weight = 0.0;

  bool operator==(const Edge&) const = default;
};

struct NodeRecord {
  NodeId id = 0;
  double x = 0.0;
  double y = 0.0;
};

/// Immutable directed weighted multigraph with planar node coordinates.
///
/// Edges are stored once, sorted by (from, to) with a stable sort so that
/// parallel edges keep their input order. An EdgeId is the position of an
/// edge in that order. The incoming adjacency indexes the same edge array.
class Graph {
 public:
  Graph() = default;

  /// Node ids must be a permutation of [0, nodes.size()). Throws
  /// ValidationError on dangling endpoints, self-loops, nonpositive or
  /// non-finite weights and non-finite coordinates.
  static Graph build(std::span<const NodeRecord> nodes, std::span<const Edge> edges);
  static Graph build(std::vector<Point> coords, std::span<const Edge> edges);

  std::size_t node_count() const noexcept { return coords_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::span<const Point> coords() const noexcept { return coords_; }
  const Point& coord(NodeId v) const { return coords_[v]; }

  /// All edges in (from, to) order.
  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[e]; }

  std::span<const Edge> out_edges(NodeId u) const {
    return std::span<const Edge>(edges_).subspan(out_offsets_[u], out_offsets_[u + 1] - out_offsets_[u]);
  }
  EdgeId first_out_edge(NodeId u) const { return out_offsets_[u]; }

  /// Ids of the edges entering v, ordered by source node.
  std::span<const EdgeId> in_edges(NodeId v) const {
    return std::span<const EdgeId>(in_edge_ids_).subspan(in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]);
  }

  std::size_t out_degree(NodeId u) const { return out_offsets_[u + 1] - out_offsets_[u]; }
  std::size_t in_degree(NodeId v) const { return in_offsets_[v + 1] - in_offsets_[v]; }

  double total_weight() const noexcept;

  /// Same topology and coordinates, new weights indexed by EdgeId.
  Graph with_weights(std::span<const double> weights) const;
  Graph with_coords(std::vector<Point> coords) const;
  /// Every edge flipped; coordinates unchanged.
  Graph reversed() const;

  bool operator==(const Graph& other) const {
    return coords_ == other.coords_ && edges_ == other.edges_;
  }

 private:
  void index();

  std::vector<Point> coords_;
  std::vector<Edge> edges_;
  std::vector<EdgeId> out_offsets_;
  std::vector<EdgeId> in_offsets_;
  std::vector<EdgeId> in_edge_ids_;
};

/// Min-max scales each coordinate axis into [0, 1]. An axis on which all
/// nodes agree maps to 0.
Graph normalize_coords(const Graph& graph);

/// Axis-aligned bounding-box diagonal of the raw coordinates.
double bounding_box_diagonal(const Graph& graph);

// Edge-list text format:
//   <|V|> <|E|>
//   |V| lines "<id> <x> <y>"
//   |E| lines "<from> <to> <weight>"
// '#' lines and blank lines are ignored. Floats are written with 9
// significant digits.
Graph read_edge_list(std::istream& in);
void write_edge_list(const Graph& graph, std::ostream& out);
Graph load_edge_list(const std::string& path);
void save_edge_list(const Graph& graph, const std::string& path);

}  // namespace gnnsde
