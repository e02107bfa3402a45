#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gnnsde/graph.hpp"
#include "gnnsde/model.hpp"

namespace gnnsde {

/// Inundated nodes plus the speed multiplier applied on flooded links.
struct FloodScenario {
  std::vector<std::uint8_t> flooded;
  double speed_factor = 1.0 / 3.0;
  std::string label;

  void validate(std::size_t node_count) const;
};

/// Travel time of an edge is divided by speed_factor when either endpoint is
/// flooded. Weights are read as travel times; topology is unchanged.
Graph apply_scenario(const Graph& graph, const FloodScenario& scenario);

/// Single-source distances from `source` over `graph` (forward direction).
using SsspBackend = std::function<std::vector<double>(const Graph& graph, NodeId source)>;

SsspBackend exact_backend();
/// Model estimates. Keeps one Predictor per distinct graph it is called with.
SsspBackend gnn_backend(const ModelParams& params);

struct DelayReport {
  std::vector<NodeId> shelters;
  double speed_factor = 1.0 / 3.0;
  /// per_shelter[i][v] = t_after(v -> shelter i) / t_before(v -> shelter i);
  /// 1 at the shelter itself, nullopt if either leg is unreachable.
  std::vector<std::vector<std::optional<double>>> per_shelter;
  /// Mean over shelters; nullopt if any shelter ratio is undefined.
  std::vector<std::optional<double>> average;
};

/// Evacuation times node -> shelter are computed by running the backend from
/// each shelter on the reversed graphs. Throws ValidationError on an empty
/// shelter list or mismatched topologies.
DelayReport delay_ratios(const Graph& before, const Graph& after, const std::vector<NodeId>& shelters,
                         const SsspBackend& backend, double speed_factor = 1.0 / 3.0);

struct DelaySummary {
  double mean = 0.0;
  double max = 0.0;
  std::size_t count = 0;
  /// bin_edges.size() == counts.size() + 1.
  std::vector<double> bin_edges;
  std::vector<std::size_t> counts;
};

inline constexpr double kDelayBinWidth = 0.05;

/// Statistics over the defined averages. Histogram bins of width 0.05 cover
/// [1, 1/speed_factor]; values outside fall into the first or last bin.
/// Throws ValidationError if no average is defined.
DelaySummary summarize(const DelayReport& report);

/// Lines "<node_id> <0|1>"; unlisted nodes are dry.
FloodScenario read_flood_mask(std::istream& in, std::size_t node_count);
FloodScenario load_flood_mask(const std::string& path, std::size_t node_count);
/// One node id per line.
std::vector<NodeId> read_shelters(std::istream& in, std::size_t node_count);
std::vector<NodeId> load_shelters(const std::string& path, std::size_t node_count);

}  // namespace gnnsde
