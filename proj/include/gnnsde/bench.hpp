#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gnnsde/dataset.hpp"
#include "gnnsde/graph.hpp"
#include "gnnsde/landmark.hpp"
#include "gnnsde/metrics.hpp"
#include "gnnsde/model.hpp"

namespace gnnsde {

enum class Method { Dijkstra, Landmark, Gnn };

Method parse_method(std::string_view name);
std::string_view to_string(Method method);

/// A source to evaluate against every reachable node, plus one designated
/// target used when timing route reconstruction.
struct Query {
  std::size_t topology = 0;
  NodeId source = 0;
  NodeId target = 0;
};

/// One query per test sample; targets drawn uniformly among reachable nodes.
std::vector<Query> make_queries(const Dataset& dataset, std::uint64_t seed);

struct TimingReport {
  std::string method;
  /// Offline preparation: landmark index build, or model training.
  double train_time = 0.0;
  /// Graph construction (+ feature generation for the model), median of repeats.
  double load_time = 0.0;
  /// Distance fields for every query.
  double run_time = 0.0;
  /// Distance fields plus one route per query.
  double run_time_path = 0.0;
  /// Median single-query distance time.
  double median_query_time = 0.0;
  std::size_t queries = 0;
  std::size_t route_failures = 0;
};

struct MethodResult {
  TimingReport timing;
  MetricReport metrics;
  std::vector<double> truth;  // aligned pairs over every (source, reachable node)
  std::vector<double> pred;
};

struct BenchResult {
  std::string label;
  std::size_t nodes = 0;  // mean node count of the evaluated graphs
  std::vector<MethodResult> methods;
};

struct BenchOptions {
  std::vector<Method> methods{Method::Dijkstra, Method::Landmark, Method::Gnn};
  /// Required when Method::Gnn is requested.
  const ModelParams* model = nullptr;
  /// Reported as the model's training time (NaN when unknown).
  double gnn_train_seconds = std::numeric_limits<double>::quiet_NaN();
  LandmarkStrategy landmark_strategy = LandmarkStrategy::Farthest;
  /// Overrides the 2%/0.5% rule when set.
  std::optional<std::size_t> landmark_count;
  std::uint64_t seed = 0;
  int load_repeats = 5;
  std::string label;
};

/// Runs every requested method over the same query list.
BenchResult bench(std::span<const Graph> graphs, std::span<const Query> queries, const BenchOptions& options);

/// Median single-source dijkstra time over `sources` (seconds).
double median_dijkstra_time(const Graph& graph, std::span<const NodeId> sources);

inline constexpr const char* kBenchTableHeader =
    "label,nodes,method,training_time_s,load_time_s,inference_time_s,inference_path_time_s,median_query_s,mae,mape,"
    "pearson,n,route_failures";

/// One row per (result, method). MAE in model units (distance / bounding-box
/// diagonal) so that values from different graphs are comparable.
void write_bench_table(std::span<const BenchResult> results, std::ostream& out);

/// Writes error_histogram.csv, scatter.csv and timing.csv into `dir`.
void emit_plots(std::span<const BenchResult> results, const std::string& dir, std::size_t bins = 20);

double median(std::vector<double> values);

}  // namespace gnnsde
