#pragma once

// Independent reference implementations used only by the test suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string_view>
#include <vector>

#include "gnnsde/graph.hpp"
#include "gnnsde/tensor.hpp"

namespace gnnsde::testing {

/// Directed graph with each ordered pair linked with probability `p`
/// (and occasionally a parallel copy), random weights and coordinates.
inline Graph random_graph(std::size_t n, double p, std::mt19937_64& rng, double w_lo = 0.1, double w_hi = 10.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> weight(w_lo, w_hi);
  std::vector<Point> coords(n);
  for (auto& c : coords) c = {100.0 * unit(rng), 100.0 * unit(rng)};
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = 0; v < n; ++v) {
      if (u == v || !(unit(rng) < p)) continue;
      edges.push_back({u, v, weight(rng)});
      if (unit(rng) < 0.05) edges.push_back({u, v, weight(rng)});
    }
  }
  return Graph::build(std::move(coords), edges);
}

/// Shortest distances by enumerating every simple path from the source.
/// Path lengths are accumulated left to right from the source.
inline std::vector<double> enumerate_shortest(const Graph& g, NodeId source) {
  const auto inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(g.node_count(), inf);
  std::vector<bool> on_path(g.node_count(), false);
  std::function<void(NodeId, double)> walk = [&](NodeId u, double length) {
    best[u] = std::min(best[u], length);
    on_path[u] = true;
    for (const auto& e : g.out_edges(u)) {
      if (!on_path[e.to]) walk(e.to, length + e.weight);
    }
    on_path[u] = false;
  };
  walk(source, 0.0);
  return best;
}

/// Unit-weight copy, used as an oracle for hop counts.
inline Graph unit_weights(const Graph& g) {
  std::vector<double> ones(g.edge_count(), 1.0);
  return g.with_weights(ones);
}

/// Central finite differences of a scalar function of one matrix.
inline Matrix numeric_gradient(Matrix x, const std::function<double(const Matrix&)>& f, double h = 1e-5) {
  Matrix grad(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + h;
    const double up = f(x);
    x.data()[i] = saved - h;
    const double down = f(x);
    x.data()[i] = saved;
    grad.data()[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor).
inline double max_relative_error(const Matrix& a, const Matrix& b, double floor = 1e-6) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double x = a.data()[i], y = b.data()[i];
    worst = std::max(worst, std::abs(x - y) / std::max({std::abs(x), std::abs(y), floor}));
  }
  return worst;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

/// Sign pattern of every ReLU input reachable from `root`, in graph order.
/// Finite-difference probes that flip this pattern straddle a kink.
inline std::vector<bool> relu_pattern(const Tensor& root) {
  std::vector<bool> pattern;
  root.visit([&](const Tensor& t) {
    if (std::string_view(t.op()) != "relu") return;
    const auto& in = t.node().parents.front()->value;
    for (Eigen::Index i = 0; i < in.size(); ++i) pattern.push_back(in.data()[i] > 0.0);
  });
  return pattern;
}

}  // namespace gnnsde::testing
