#include "gnnsde/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "gnnsde/error.hpp"
#include "text_util.hpp"

namespace gnnsde {

namespace {

void validate(const std::vector<Point>& coords, std::span<const Edge> edges) {
  const auto n = coords.size();
  for (std::size_t v = 0; v < n; ++v) {
    if (!std::isfinite(coords[v].x) || !std::isfinite(coords[v].y)) {
      throw ValidationError("node " + std::to_string(v) + " has non-finite coordinates");
    }
  }
  for (const auto& e : edges) {
    if (e.from >= n || e.to >= n) {
      throw ValidationError("edge " + std::to_string(e.from) + "->" + std::to_string(e.to) +
                            " references a missing node");
    }
    if (e.from == e.to) {
      throw ValidationError("self-loop at node " + std::to_string(e.from));
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw ValidationError("edge " + std::to_string(e.from) + "->" + std::to_string(e.to) +
                            " has nonpositive or non-finite weight");
    }
  }
}

}  // namespace

Graph Graph::build(std::span<const NodeRecord> nodes, std::span<const Edge> edges) {
  std::vector<Point> coords(nodes.size());
  std::vector<bool> seen(nodes.size(), false);
  for (const auto& rec : nodes) {
    if (rec.id >= nodes.size() || seen[rec.id]) {
      throw ValidationError("node ids must be a permutation of [0, " + std::to_string(nodes.size()) +
                            "), got id " + std::to_string(rec.id));
    }
    seen[rec.id] = true;
    coords[rec.id] = {rec.x, rec.y};
  }
  return build(std::move(coords), edges);
}

Graph Graph::build(std::vector<Point> coords, std::span<const Edge> edges) {
  validate(coords, edges);
  Graph g;
  g.coords_ = std::move(coords);
  g.edges_.assign(edges.begin(), edges.end());
  std::stable_sort(g.edges_.begin(), g.edges_.end(), [](const Edge& a, const Edge& b) {
    return a.from != b.from ? a.from < b.from : a.to < b.to;
  });
  g.index();
  return g;
}

void Graph::index() {
  const auto n = coords_.size();
  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) {
    ++out_offsets_[e.from + 1];
    ++in_offsets_[e.to + 1];
  }
  std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
  std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());

  // Edges are already sorted by source, so filling by destination in edge
  // order leaves each incoming list sorted by source.
  in_edge_ids_.resize(edges_.size());
  std::vector<EdgeId> cursor(in_offsets_.begin(), in_offsets_.end() - 1);
  for (EdgeId id = 0; id < edges_.size(); ++id) {
    in_edge_ids_[cursor[edges_[id].to]++] = id;
  }
}

double Graph::total_weight() const noexcept {
  double total = 0.0;
  for (const auto& e : edges_) total += e.weight;
  return total;
}

Graph Graph::with_weights(std::span<const double> weights) const {
  if (weights.size() != edges_.size()) {
    throw ValidationError("weight array length " + std::to_string(weights.size()) + " != edge count " +
                          std::to_string(edges_.size()));
  }
  std::vector<Edge> edges = edges_;
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i].weight = weights[i];
  validate(coords_, edges);
  Graph g = *this;
  g.edges_ = std::move(edges);
  return g;
}

Graph Graph::with_coords(std::vector<Point> coords) const {
  if (coords.size() != coords_.size()) {
    throw ValidationError("coordinate array length mismatch");
  }
  validate(coords, {});
  Graph g = *this;
  g.coords_ = std::move(coords);
  return g;
}

Graph Graph::reversed() const {
  std::vector<Edge> flipped;
  flipped.reserve(edges_.size());
  for (const auto& e : edges_) flipped.push_back({e.to, e.from, e.weight});
  return build(coords_, flipped);
}

Graph normalize_coords(const Graph& graph) {
  auto coords = std::vector<Point>(graph.coords().begin(), graph.coords().end());
  if (coords.empty()) return graph;
  auto [min_x, max_x] = std::minmax_element(coords.begin(), coords.end(),
                                            [](const Point& a, const Point& b) { return a.x < b.x; });
  auto [min_y, max_y] = std::minmax_element(coords.begin(), coords.end(),
                                            [](const Point& a, const Point& b) { return a.y < b.y; });
  const double lo_x = min_x->x, span_x = max_x->x - min_x->x;
  const double lo_y = min_y->y, span_y = max_y->y - min_y->y;
  for (auto& p : coords) {
    p.x = span_x > 0.0 ? (p.x - lo_x) / span_x : 0.0;
    p.y = span_y > 0.0 ? (p.y - lo_y) / span_y : 0.0;
  }
  return graph.with_coords(std::move(coords));
}

double bounding_box_diagonal(const Graph& graph) {
  const auto coords = graph.coords();
  if (coords.empty()) return 0.0;
  double lo_x = coords[0].x, hi_x = coords[0].x, lo_y = coords[0].y, hi_y = coords[0].y;
  for (const auto& p : coords) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  return std::hypot(hi_x - lo_x, hi_y - lo_y);
}

Graph read_edge_list(std::istream& in) {
  detail::LineReader reader(in);
  auto header = reader.next();
  if (!header || header->size() != 2) {
    throw ParseError(reader.line(), "expected header '<node_count> <edge_count>'");
  }
  const auto n = detail::parse_int<std::size_t>((*header)[0], reader.line(), "node count");
  const auto m = detail::parse_int<std::size_t>((*header)[1], reader.line(), "edge count");

  std::vector<NodeRecord> nodes;
  nodes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto tokens = reader.next();
    if (!tokens) throw ParseError(reader.line(), "unexpected end of file in node section");
    if (tokens->size() != 3) throw ParseError(reader.line(), "expected '<id> <x> <y>'");
    const auto line = reader.line();
    NodeRecord rec{detail::parse_int<NodeId>((*tokens)[0], line, "node id"),
                   detail::parse_real((*tokens)[1], line, "x coordinate"),
                   detail::parse_real((*tokens)[2], line, "y coordinate")};
    if (rec.id >= n) throw ParseError(line, "node id " + std::to_string(rec.id) + " out of range");
    if (!std::isfinite(rec.x) || !std::isfinite(rec.y)) throw ParseError(line, "non-finite coordinate");
    nodes.push_back(rec);
  }

  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto tokens = reader.next();
    if (!tokens) throw ParseError(reader.line(), "unexpected end of file in edge section");
    if (tokens->size() != 3) throw ParseError(reader.line(), "expected '<from> <to> <weight>'");
    const auto line = reader.line();
    Edge e{detail::parse_int<NodeId>((*tokens)[0], line, "edge source"),
           detail::parse_int<NodeId>((*tokens)[1], line, "edge target"),
           detail::parse_real((*tokens)[2], line, "edge weight")};
    if (e.from >= n || e.to >= n) throw ParseError(line, "edge endpoint out of range");
    if (e.from == e.to) throw ParseError(line, "self-loop");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) throw ParseError(line, "edge weight must be positive");
    edges.push_back(e);
  }
  if (reader.next()) throw ParseError(reader.line(), "trailing content after edge section");

  try {
    return Graph::build(nodes, edges);
  } catch (const ValidationError& err) {
    throw ParseError(reader.line(), err.what());
  }
}

void write_edge_list(const Graph& graph, std::ostream& out) {
  out << graph.node_count() << ' ' << graph.edge_count() << '\n';
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    const auto& p = graph.coord(v);
    out << v << ' ' << detail::format_real(p.x) << ' ' << detail::format_real(p.y) << '\n';
  }
  for (const auto& e : graph.edges()) {
    out << e.from << ' ' << e.to << ' ' << detail::format_real(e.weight) << '\n';
  }
}

Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open graph file '" + path + "'");
  return read_edge_list(in);
}

void save_edge_list(const Graph& graph, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write graph file '" + path + "'");
  write_edge_list(graph, out);
}

}  // namespace gnnsde
