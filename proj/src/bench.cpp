#include "gnnsde/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <random>

#include "gnnsde/error.hpp"
#include "gnnsde/pathfinder.hpp"
#include "gnnsde/sssp.hpp"
#include "text_util.hpp"

namespace gnnsde {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Graph rebuild(const Graph& graph) {
  return Graph::build(std::vector<Point>(graph.coords().begin(), graph.coords().end()), graph.edges());
}

std::string fmt(double value) {
  if (std::isnan(value)) return "nan";
  return detail::format_real(value, 9);
}

/// Per-topology query lists, preserving the global order inside each.
std::map<std::size_t, std::vector<const Query*>> by_topology(std::span<const Query> queries) {
  std::map<std::size_t, std::vector<const Query*>> out;
  for (const auto& q : queries) out[q.topology].push_back(&q);
  return out;
}

}  // namespace

Method parse_method(std::string_view name) {
  if (name == "dijkstra") return Method::Dijkstra;
  if (name == "landmark") return Method::Landmark;
  if (name == "gnn") return Method::Gnn;
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Dijkstra:
      return "dijkstra";
    case Method::Landmark:
      return "landmark";
    case Method::Gnn:
      return "gnn";
  }
  return "?";
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::vector<Query> make_queries(const Dataset& dataset, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 0x7000));
  std::vector<Query> queries;
  queries.reserve(dataset.test.size());
  for (const auto& s : dataset.test) {
    std::vector<NodeId> reachable;
    for (NodeId v = 0; v < s.dist.size(); ++v) {
      if (v != s.source && std::isfinite(s.dist[v])) reachable.push_back(v);
    }
    NodeId target = s.source;
    if (!reachable.empty()) {
      target = reachable[std::uniform_int_distribution<std::size_t>(0, reachable.size() - 1)(rng)];
    }
    queries.push_back({s.topology, s.source, target});
  }
  return queries;
}

double median_dijkstra_time(const Graph& graph, std::span<const NodeId> sources) {
  std::vector<double> times;
  times.reserve(sources.size());
  volatile double sink = 0.0;
  for (auto s : sources) {
    const auto start = Clock::now();
    const auto result = dijkstra(graph, s);
    times.push_back(seconds_since(start));
    sink = sink + result.dist.back();
  }
  return median(times);
}

BenchResult bench(std::span<const Graph> graphs, std::span<const Query> queries, const BenchOptions& options) {
  if (queries.empty()) throw ValidationError("bench: no queries");
  for (const auto& q : queries) {
    if (q.topology >= graphs.size()) throw ValidationError("bench: query references a missing topology");
    if (q.source >= graphs[q.topology].node_count() || q.target >= graphs[q.topology].node_count()) {
      throw ValidationError("bench: query node out of range");
    }
  }
  const bool wants_gnn = std::find(options.methods.begin(), options.methods.end(), Method::Gnn) != options.methods.end();
  if (wants_gnn && options.model == nullptr) throw ValidationError("bench: gnn requested without a model");
  const auto repeats = std::max(1, options.load_repeats);
  const auto groups = by_topology(queries);

  BenchResult result;
  result.label = options.label;
  {
    double total = 0.0;
    for (const auto& [topo, _] : groups) total += static_cast<double>(graphs[topo].node_count());
    result.nodes = static_cast<std::size_t>(std::llround(total / static_cast<double>(groups.size())));
  }

  // Ground truth and per-topology distance scales, outside every timer.
  std::vector<SsspResult> truth;
  truth.reserve(queries.size());
  for (const auto& q : queries) truth.push_back(dijkstra(graphs[q.topology], q.source));
  std::vector<double> scale(graphs.size(), 1.0);
  for (const auto& [topo, _] : groups) {
    const double diag = bounding_box_diagonal(graphs[topo]);
    scale[topo] = diag > 0.0 ? diag : 1.0;
  }

  for (const auto method : options.methods) {
    MethodResult mr;
    mr.timing.method = std::string(to_string(method));
    mr.timing.queries = queries.size();
    std::vector<double> per_query;
    std::vector<std::vector<double>> fields(queries.size());

    for (const auto& [topo, topo_queries] : groups) {
      const Graph& source_graph = graphs[topo];

      // Load: graph construction, plus features for the model.
      std::vector<double> load_samples;
      std::optional<Graph> graph;
      std::optional<Predictor> predictor;
      std::vector<FeatureSet> features;
      for (int r = 0; r < repeats; ++r) {
        const auto start = Clock::now();
        graph.emplace(rebuild(source_graph));
        if (method == Method::Gnn) {
          predictor.emplace(*graph, *options.model);
          features.clear();
          for (const auto* q : topo_queries) features.push_back(predictor->context().features(q->source));
        }
        load_samples.push_back(seconds_since(start));
      }
      mr.timing.load_time += median(load_samples);

      std::optional<LandmarkIndex> index;
      if (method == Method::Landmark) {
        const auto start = Clock::now();
        const auto count = options.landmark_count.value_or(landmark_count_rule(graph->node_count()));
        auto landmarks = select_landmarks(*graph, std::min(count, graph->node_count()), options.landmark_strategy,
                                          derive_seed(options.seed, 0x8000 + topo));
        index = LandmarkIndex::build(*graph, std::move(landmarks));
        mr.timing.train_time += seconds_since(start);
      }

      auto distance_field = [&](std::size_t i, const Query& q) -> std::vector<double> {
        switch (method) {
          case Method::Dijkstra:
            return dijkstra(*graph, q.source).dist;
          case Method::Landmark:
            return index->estimate_all(q.source);
          case Method::Gnn:
            return predictor->predict(features[i]);
        }
        return {};
      };

      for (std::size_t i = 0; i < topo_queries.size(); ++i) {
        const Query& q = *topo_queries[i];
        const auto start = Clock::now();
        auto field = distance_field(i, q);
        const double elapsed = seconds_since(start);
        per_query.push_back(elapsed);
        mr.timing.run_time += elapsed;
        fields[static_cast<std::size_t>(&q - queries.data())] = std::move(field);
      }

      for (std::size_t i = 0; i < topo_queries.size(); ++i) {
        const Query& q = *topo_queries[i];
        const auto start = Clock::now();
        try {
          if (method == Method::Dijkstra) {
            const auto sssp = dijkstra(*graph, q.source);
            (void)shortest_path(sssp, q.target);
          } else {
            const auto field = distance_field(i, q);
            (void)route_from_field(*graph, field, q.source, q.target, PredecessorMode::Consistent);
          }
        } catch (const RoutingError&) {
          ++mr.timing.route_failures;
        } catch (const UnreachableError&) {
          ++mr.timing.route_failures;
        }
        mr.timing.run_time_path += seconds_since(start);
      }
    }
    mr.timing.median_query_time = median(per_query);
    if (method == Method::Gnn) mr.timing.train_time = options.gnn_train_seconds;

    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto& exact = truth[i].dist;
      const double s = scale[queries[i].topology];
      for (std::size_t v = 0; v < exact.size(); ++v) {
        if (!std::isfinite(exact[v])) continue;
        mr.truth.push_back(exact[v] / s);
        mr.pred.push_back(fields[i][v] / s);
      }
    }
    mr.metrics = metrics(mr.truth, mr.pred);
    result.methods.push_back(std::move(mr));
  }
  return result;
}

void write_bench_table(std::span<const BenchResult> results, std::ostream& out) {
  out << kBenchTableHeader << '\n';
  for (const auto& r : results) {
    for (const auto& m : r.methods) {
      const auto& t = m.timing;
      out << r.label << ',' << r.nodes << ',' << t.method << ',' << fmt(t.train_time) << ',' << fmt(t.load_time)
          << ',' << fmt(t.run_time) << ',' << fmt(t.run_time_path) << ',' << fmt(t.median_query_time) << ','
          << fmt(m.metrics.mae) << ',' << fmt(m.metrics.mape) << ',' << fmt(m.metrics.pearson) << ','
          << m.metrics.n << ',' << t.route_failures << '\n';
    }
  }
}

void emit_plots(std::span<const BenchResult> results, const std::string& dir, std::size_t bins) {
  std::filesystem::create_directories(dir);
  const auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
  std::ofstream hist(path("error_histogram.csv"));
  std::ofstream scatter(path("scatter.csv"));
  std::ofstream timing(path("timing.csv"));
  if (!hist || !scatter || !timing) throw Error("cannot write plot files into '" + dir + "'");

  hist << "label,nodes,method,metric,bin_lo,bin_hi,count\n";
  scatter << "label,method,truth,pred\n";
  timing << "label,nodes,method,training_time_s,load_time_s,inference_time_s,inference_path_time_s,median_query_s,"
            "queries\n";
  for (const auto& r : results) {
    for (const auto& m : r.methods) {
      std::vector<double> abs_err, pct_err;
      abs_err.reserve(m.truth.size());
      for (std::size_t i = 0; i < m.truth.size(); ++i) {
        const double err = std::abs(m.truth[i] - m.pred[i]);
        abs_err.push_back(err);
        if (m.truth[i] != 0.0) pct_err.push_back(100.0 * err / m.truth[i]);
        scatter << r.label << ',' << m.timing.method << ',' << fmt(m.truth[i]) << ',' << fmt(m.pred[i]) << '\n';
      }
      for (const auto& [name, values] : {std::pair{"abs_error", &abs_err}, std::pair{"abs_pct_error", &pct_err}}) {
        if (values->empty()) continue;
        const double hi = *std::max_element(values->begin(), values->end());
        const auto h = histogram(*values, bins, 0.0, hi);
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
          hist << r.label << ',' << r.nodes << ',' << m.timing.method << ',' << name << ',' << fmt(h.edges[b]) << ','
               << fmt(h.edges[b + 1]) << ',' << h.counts[b] << '\n';
        }
      }
      const auto& t = m.timing;
      timing << r.label << ',' << r.nodes << ',' << t.method << ',' << fmt(t.train_time) << ',' << fmt(t.load_time)
             << ',' << fmt(t.run_time) << ',' << fmt(t.run_time_path) << ',' << fmt(t.median_query_time) << ','
             << t.queries << '\n';
    }
  }
}

}  // namespace gnnsde
