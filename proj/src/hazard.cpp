#include "gnnsde/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>

#include "gnnsde/error.hpp"
#include "gnnsde/sssp.hpp"
#include "text_util.hpp"

namespace gnnsde {

void FloodScenario::validate(std::size_t node_count) const {
  if (flooded.size() != node_count) {
    throw ValidationError("flood flag array has " + std::to_string(flooded.size()) + " entries for " +
                          std::to_string(node_count) + " nodes");
  }
  if (!(speed_factor > 0.0 && speed_factor <= 1.0)) throw ValidationError("speed_factor must be in (0, 1]");
}

Graph apply_scenario(const Graph& graph, const FloodScenario& scenario) {
  scenario.validate(graph.node_count());
  std::vector<double> weights;
  weights.reserve(graph.edge_count());
  for (const auto& e : graph.edges()) {
    const bool slowed = scenario.flooded[e.from] || scenario.flooded[e.to];
    weights.push_back(slowed ? e.weight / scenario.speed_factor : e.weight);
  }
  return graph.with_weights(weights);
}

SsspBackend exact_backend() {
  return [](const Graph& graph, NodeId source) { return dijkstra(graph, source).dist; };
}

SsspBackend gnn_backend(const ModelParams& params) {
  // Predictors are keyed by graph identity; delay_ratios passes the same two
  // reversed graphs for every shelter.
  auto cache = std::make_shared<std::map<const Graph*, std::unique_ptr<Predictor>>>();
  return [params, cache](const Graph& graph, NodeId source) {
    auto& slot = (*cache)[&graph];
    if (!slot || !(slot->context().graph() == graph)) slot = std::make_unique<Predictor>(graph, params);
    return slot->predict(source);
  };
}

DelayReport delay_ratios(const Graph& before, const Graph& after, const std::vector<NodeId>& shelters,
                         const SsspBackend& backend, double speed_factor) {
  if (shelters.empty()) throw ValidationError("delay_ratios: shelter list is empty");
  if (before.node_count() != after.node_count() || before.edge_count() != after.edge_count()) {
    throw ValidationError("delay_ratios: before/after graphs differ in topology");
  }
  for (std::size_t e = 0; e < before.edge_count(); ++e) {
    if (before.edge(e).from != after.edge(e).from || before.edge(e).to != after.edge(e).to) {
      throw ValidationError("delay_ratios: before/after graphs differ in topology");
    }
  }
  const auto n = before.node_count();
  for (auto s : shelters) {
    if (s >= n) throw ValidationError("shelter " + std::to_string(s) + " out of range");
  }

  const Graph before_rev = before.reversed();
  const Graph after_rev = after.reversed();
  DelayReport report;
  report.shelters = shelters;
  report.speed_factor = speed_factor;
  report.per_shelter.reserve(shelters.size());
  for (auto shelter : shelters) {
    const auto t0 = backend(before_rev, shelter);
    const auto t1 = backend(after_rev, shelter);
    std::vector<std::optional<double>> ratio(n);
    for (NodeId v = 0; v < n; ++v) {
      if (v == shelter) {
        ratio[v] = 1.0;
      } else if (std::isfinite(t0[v]) && std::isfinite(t1[v]) && t0[v] > 0.0) {
        ratio[v] = t1[v] / t0[v];
      }
    }
    report.per_shelter.push_back(std::move(ratio));
  }

  report.average.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    double sum = 0.0;
    bool defined = true;
    for (const auto& ratio : report.per_shelter) {
      if (!ratio[v]) {
        defined = false;
        break;
      }
      sum += *ratio[v];
    }
    if (defined) report.average[v] = sum / static_cast<double>(shelters.size());
  }
  return report;
}

DelaySummary summarize(const DelayReport& report) {
  DelaySummary summary;
  const double hi = 1.0 / report.speed_factor;
  const auto bins = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi - 1.0) / kDelayBinWidth - 1e-9)));
  summary.counts.assign(bins, 0);
  for (std::size_t b = 0; b <= bins; ++b) summary.bin_edges.push_back(1.0 + kDelayBinWidth * static_cast<double>(b));

  double sum = 0.0;
  for (const auto& value : report.average) {
    if (!value) continue;
    const double x = *value;
    sum += x;
    summary.max = summary.count == 0 ? x : std::max(summary.max, x);
    ++summary.count;
    const double pos = std::floor((x - 1.0) / kDelayBinWidth);
    const auto bin = pos < 0.0 ? 0 : std::min(bins - 1, static_cast<std::size_t>(pos));
    ++summary.counts[bin];
  }
  if (summary.count == 0) throw ValidationError("summarize: no defined delay ratios");
  summary.mean = sum / static_cast<double>(summary.count);
  return summary;
}

FloodScenario read_flood_mask(std::istream& in, std::size_t node_count) {
  FloodScenario scenario;
  scenario.flooded.assign(node_count, 0);
  detail::LineReader reader(in);
  while (auto tokens = reader.next()) {
    const auto line = reader.line();
    if (tokens->size() != 2) throw ParseError(line, "expected '<node_id> <0|1>'");
    const auto v = detail::parse_int<std::size_t>((*tokens)[0], line, "node id");
    const auto flag = detail::parse_int<int>((*tokens)[1], line, "flood flag");
    if (v >= node_count) throw ParseError(line, "node id " + std::to_string(v) + " out of range");
    if (flag != 0 && flag != 1) throw ParseError(line, "flood flag must be 0 or 1");
    scenario.flooded[v] = static_cast<std::uint8_t>(flag);
  }
  return scenario;
}

FloodScenario load_flood_mask(const std::string& path, std::size_t node_count) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open flood mask '" + path + "'");
  return read_flood_mask(in, node_count);
}

std::vector<NodeId> read_shelters(std::istream& in, std::size_t node_count) {
  std::vector<NodeId> shelters;
  detail::LineReader reader(in);
  while (auto tokens = reader.next()) {
    const auto line = reader.line();
    if (tokens->size() != 1) throw ParseError(line, "expected one node id per line");
    const auto v = detail::parse_int<NodeId>((*tokens)[0], line, "shelter id");
    if (v >= node_count) throw ParseError(line, "shelter id " + std::to_string(v) + " out of range");
    shelters.push_back(v);
  }
  return shelters;
}

std::vector<NodeId> load_shelters(const std::string& path, std::size_t node_count) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open shelter file '" + path + "'");
  return read_shelters(in, node_count);
}

}  // namespace gnnsde
