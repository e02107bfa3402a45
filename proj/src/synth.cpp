#include "gnnsde/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gnnsde/error.hpp"

namespace gnnsde {

namespace {

constexpr double kPresetDropProb = 0.05;
constexpr double kPresetDiagonalProb = 0.2;
constexpr double kPresetJitter = 0.2;

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), 0); }

  std::size_t find(std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
  }

  std::vector<std::size_t> parent;
  std::vector<std::size_t> size;
};

struct Link {
  std::size_t a;
  std::size_t b;
};

}  // namespace

void SynthConfig::validate() const {
  if (rows < 2 || cols < 2) throw ValidationError("rows and cols must be >= 2");
  auto in_unit = [](double p, bool closed) { return p >= 0.0 && (closed ? p <= 1.0 : p < 1.0); };
  if (!in_unit(node_drop_prob, false)) throw ValidationError("node_drop_prob must be in [0, 1)");
  if (!in_unit(edge_drop_prob, false)) throw ValidationError("edge_drop_prob must be in [0, 1)");
  if (!in_unit(diagonal_prob, true)) throw ValidationError("diagonal_prob must be in [0, 1]");
  if (!(coord_jitter >= 0.0) || !std::isfinite(coord_jitter)) throw ValidationError("coord_jitter must be >= 0");
}

Graph generate(const SynthConfig& config) {
  config.validate();
  const auto rows = static_cast<std::size_t>(config.rows);
  const auto cols = static_cast<std::size_t>(config.cols);
  const std::size_t n = rows * cols;
  auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Draw order is fixed: jitter, diagonals, node drops, edge drops.
  std::vector<Point> pos(n);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double jx = config.coord_jitter * (2.0 * unit(rng) - 1.0);
      const double jy = config.coord_jitter * (2.0 * unit(rng) - 1.0);
      pos[id(r, c)] = {static_cast<double>(c) + jx, static_cast<double>(r) + jy};
    }
  }

  std::vector<Link> links;
  links.reserve(3 * n);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) links.push_back({id(r, c), id(r, c + 1)});
      if (r + 1 < rows) links.push_back({id(r, c), id(r + 1, c)});
    }
  }
  for (std::size_t r = 0; r + 1 < rows; ++r) {
    for (std::size_t c = 0; c + 1 < cols; ++c) {
      const bool add = unit(rng) < config.diagonal_prob;
      const bool anti = unit(rng) < 0.5;
      if (!add) continue;
      if (anti) {
        links.push_back({id(r, c + 1), id(r + 1, c)});
      } else {
        links.push_back({id(r, c), id(r + 1, c + 1)});
      }
    }
  }

  std::vector<bool> node_alive(n);
  for (std::size_t v = 0; v < n; ++v) node_alive[v] = !(unit(rng) < config.node_drop_prob);
  std::vector<Link> kept;
  kept.reserve(links.size());
  for (const auto& l : links) {
    const bool edge_alive = !(unit(rng) < config.edge_drop_prob);
    if (edge_alive && node_alive[l.a] && node_alive[l.b]) kept.push_back(l);
  }

  UnionFind uf(n);
  for (const auto& l : kept) uf.unite(l.a, l.b);
  // Largest component; ties go to the component holding the smallest grid id.
  std::size_t best_root = n;
  std::size_t best_size = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (!node_alive[v]) continue;
    const auto root = uf.find(v);
    if (uf.size[root] > best_size) {
      best_size = uf.size[root];
      best_root = root;
    }
  }
  if (best_size < 4) {
    throw ValidationError("generated network has only " + std::to_string(best_size) +
                          " connected nodes (need at least 4)");
  }

  std::vector<NodeId> new_id(n, kNoNode);
  std::vector<Point> coords;
  coords.reserve(best_size);
  for (std::size_t v = 0; v < n; ++v) {
    if (node_alive[v] && uf.find(v) == best_root) {
      new_id[v] = static_cast<NodeId>(coords.size());
      coords.push_back(pos[v]);
    }
  }

  std::vector<Edge> edges;
  edges.reserve(2 * kept.size());
  for (const auto& l : kept) {
    const NodeId a = new_id[l.a];
    const NodeId b = new_id[l.b];
    if (a == kNoNode || b == kNoNode) continue;
    const double w = std::hypot(pos[l.a].x - pos[l.b].x, pos[l.a].y - pos[l.b].y);
    edges.push_back({a, b, w});
    edges.push_back({b, a, w});
  }
  return Graph::build(std::move(coords), edges);
}

std::size_t preset_node_count(std::string_view name) {
  if (name == "1k") return 1000;
  if (name == "2k") return 2000;
  if (name == "3k") return 3000;
  if (name == "4k") return 4000;
  if (name == "10k") return 10000;
  if (name == "20k") return 20000;
  if (name == "50k") return 50000;
  if (name == "100k") return 100000;
  throw ValidationError("unknown size preset '" + std::string(name) + "'");
}

SynthConfig size_preset(std::string_view name, std::uint64_t seed) {
  const auto target = static_cast<double>(preset_node_count(name));
  const int side = static_cast<int>(std::ceil(std::sqrt(target / (1.0 - kPresetDropProb))));
  SynthConfig config;
  config.rows = side;
  config.cols = side;
  config.node_drop_prob = kPresetDropProb;
  config.edge_drop_prob = kPresetDropProb;
  config.diagonal_prob = kPresetDiagonalProb;
  config.coord_jitter = kPresetJitter;
  config.seed = seed;
  return config;
}

}  // namespace gnnsde
