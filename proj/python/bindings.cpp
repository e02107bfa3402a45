#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include "gnnsde/error.hpp"
#include "gnnsde/graph.hpp"
#include "gnnsde/hazard.hpp"
#include "gnnsde/landmark.hpp"
#include "gnnsde/metrics.hpp"
#include "gnnsde/model.hpp"
#include "gnnsde/pathfinder.hpp"
#include "gnnsde/sssp.hpp"
#include "gnnsde/synth.hpp"

namespace py = pybind11;
using namespace gnnsde;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

// kNoNode and kUnreachableHops both surface as -1.
py::array_t<std::int64_t> to_index_array(const std::vector<std::uint32_t>& v, std::uint32_t missing) {
  py::array_t<std::int64_t> out(v.size());
  auto w = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < v.size(); ++i) w(i) = v[i] == missing ? -1 : static_cast<std::int64_t>(v[i]);
  return out;
}

Graph make_graph(const std::vector<std::pair<double, double>>& coords,
                 const std::vector<std::tuple<NodeId, NodeId, double>>& edges) {
  std::vector<Point> pts;
  pts.reserve(coords.size());
  for (const auto& [x, y] : coords) pts.push_back({x, y});
  std::vector<Edge> es;
  es.reserve(edges.size());
  for (const auto& [u, v, w] : edges) es.push_back({u, v, w});
  return Graph::build(std::move(pts), es);
}

std::vector<std::optional<double>> delay_average(const Graph& before, const Graph& after,
                                                 const std::vector<NodeId>& shelters, double speed_factor) {
  return delay_ratios(before, after, shelters, exact_backend(), speed_factor).average;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "GNN shortest-distance estimation core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto validation = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", validation.ptr());
  py::register_exception<RoutingError>(m, "RoutingError", base.ptr());
  py::register_exception<UnreachableError>(m, "UnreachableError", base.ptr());

  py::class_<Graph>(m, "Graph")
      .def(py::init(&make_graph), py::arg("coords"), py::arg("edges"),
           "Build from [(x, y)] and [(from, to, weight)].")
      .def_static("load", &load_edge_list, py::arg("path"))
      .def("save", [](const Graph& g, const std::string& path) { save_edge_list(g, path); }, py::arg("path"))
      .def_property_readonly("node_count", &Graph::node_count)
      .def_property_readonly("edge_count", &Graph::edge_count)
      .def("edges",
           [](const Graph& g) {
             std::vector<std::tuple<NodeId, NodeId, double>> out;
             for (const auto& e : g.edges()) out.emplace_back(e.from, e.to, e.weight);
             return out;
           })
      .def("coords",
           [](const Graph& g) {
             py::array_t<double> out({g.node_count(), std::size_t{2}});
             auto w = out.mutable_unchecked<2>();
             for (NodeId v = 0; v < g.node_count(); ++v) {
               w(v, 0) = g.coord(v).x;
               w(v, 1) = g.coord(v).y;
             }
             return out;
           })
      .def("total_weight", &Graph::total_weight)
      .def("reversed", &Graph::reversed)
      .def("__eq__", [](const Graph& a, const Graph& b) { return a == b; });

  m.def(
      "generate",
      [](int rows, int cols, double node_drop_prob, double edge_drop_prob, double diagonal_prob,
         double coord_jitter, std::uint64_t seed) {
        return generate(SynthConfig{rows, cols, node_drop_prob, edge_drop_prob, diagonal_prob, coord_jitter, seed});
      },
      py::arg("rows"), py::arg("cols"), py::arg("node_drop_prob") = 0.0, py::arg("edge_drop_prob") = 0.0,
      py::arg("diagonal_prob") = 0.0, py::arg("coord_jitter") = 0.0, py::arg("seed") = 0);
  m.def(
      "generate_preset", [](const std::string& name, std::uint64_t seed) { return generate(size_preset(name, seed)); },
      py::arg("preset"), py::arg("seed") = 0);

  m.def(
      "dijkstra",
      [](const Graph& g, NodeId source, bool reverse) {
        const auto r = dijkstra(g, source, reverse ? Direction::Reverse : Direction::Forward);
        return py::make_tuple(to_array(r.dist), to_index_array(r.pred, kNoNode));
      },
      py::arg("graph"), py::arg("source"), py::arg("reverse") = false, "Returns (dist, pred); pred -1 when unset.");
  m.def(
      "bellman_ford", [](const Graph& g, NodeId source) { return to_array(bellman_ford(g, source).dist); },
      py::arg("graph"), py::arg("source"));
  m.def(
      "bfs_hops", [](const Graph& g, NodeId source) { return to_index_array(bfs_hops(g, source), kUnreachableHops); },
      py::arg("graph"), py::arg("source"));

  py::class_<ModelParams>(m, "ModelParams")
      .def_static(
          "init",
          [](int hidden, int layers, std::uint64_t seed) {
            ModelConfig c;
            c.hidden = hidden;
            c.layers = layers;
            return ModelParams::init(c, seed);
          },
          py::arg("hidden") = 64, py::arg("layers") = 3, py::arg("seed") = 0)
      .def_static("load", &ModelParams::load, py::arg("path"))
      .def("save", &ModelParams::save, py::arg("path"))
      .def_property_readonly("hidden", [](const ModelParams& p) { return p.config.hidden; })
      .def_property_readonly("layers", [](const ModelParams& p) { return p.config.layers; })
      .def("scalar_count", [](const ModelParams& p) { return p.params.scalar_count(); })
      .def("__eq__", [](const ModelParams& a, const ModelParams& b) { return a == b; });

  m.def(
      "train",
      [](const std::vector<Graph>& graphs, const std::vector<std::pair<std::size_t, NodeId>>& samples, int epochs,
         int batch_size, double lr, int hidden, std::uint64_t seed) {
        std::vector<TrainSample> ts;
        for (const auto& [topo, source] : samples) {
          if (topo >= graphs.size()) throw ValidationError("sample references a missing topology");
          ts.push_back({topo, source, dijkstra(graphs[topo], source).dist, bfs_hops(graphs[topo], source)});
        }
        TrainConfig tc;
        tc.epochs = epochs;
        tc.batch_size = batch_size;
        tc.lr = lr;
        tc.model.hidden = hidden;
        tc.seed = seed;
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(graphs, ts, tc);
        }
        return py::make_tuple(r.params, r.loss_history);
      },
      py::arg("graphs"), py::arg("samples"), py::arg("epochs") = 100, py::arg("batch_size") = 64,
      py::arg("lr") = 1e-3, py::arg("hidden") = 64, py::arg("seed") = 0,
      "samples: [(topology index, source)]. Returns (params, loss_history).");
  m.def(
      "predict_sssd",
      [](const Graph& g, NodeId source, const ModelParams& params) { return to_array(predict_sssd(g, source, params)); },
      py::arg("graph"), py::arg("source"), py::arg("params"));

  py::class_<LandmarkIndex>(m, "LandmarkIndex")
      .def_static(
          "build",
          [](const Graph& g, std::optional<std::size_t> count, const std::string& strategy, std::uint64_t seed) {
            const auto k = count.value_or(landmark_count_rule(g.node_count()));
            return LandmarkIndex::build(g, select_landmarks(g, k, parse_landmark_strategy(strategy), seed));
          },
          py::arg("graph"), py::arg("count") = py::none(), py::arg("strategy") = "farthest", py::arg("seed") = 0)
      .def_property_readonly("landmarks", &LandmarkIndex::landmarks)
      .def("estimate", &LandmarkIndex::estimate, py::arg("s"), py::arg("t"))
      .def(
          "estimate_all", [](const LandmarkIndex& idx, NodeId s) { return to_array(idx.estimate_all(s)); },
          py::arg("s"));
  m.def("landmark_count_rule", &landmark_count_rule, py::arg("node_count"));

  m.def(
      "route",
      [](const Graph& g, const std::vector<double>& dist, NodeId s, NodeId t, const std::string& mode) {
        return route_from_field(g, dist, s, t, parse_predecessor_mode(mode)).nodes;
      },
      py::arg("graph"), py::arg("dist"), py::arg("s"), py::arg("t"), py::arg("mode") = "consistent");
  m.def(
      "path_weight", [](const Graph& g, const std::vector<NodeId>& path) { return path_weight(g, path); },
      py::arg("graph"), py::arg("path"));

  m.def(
      "apply_scenario",
      [](const Graph& g, const std::vector<bool>& flooded, double speed_factor) {
        FloodScenario s;
        s.flooded.assign(flooded.begin(), flooded.end());
        s.speed_factor = speed_factor;
        return apply_scenario(g, s);
      },
      py::arg("graph"), py::arg("flooded"), py::arg("speed_factor") = 1.0 / 3.0);
  m.def("delay_ratios", &delay_average, py::arg("before"), py::arg("after"), py::arg("shelters"),
        py::arg("speed_factor") = 1.0 / 3.0, "Shelter-averaged delay ratio per node (None when undefined).");

  m.def(
      "metrics",
      [](const std::vector<double>& truth, const std::vector<double>& pred) {
        const auto r = metrics(truth, pred);
        py::dict d;
        d["mae"] = r.mae;
        d["mape"] = r.mape;
        d["pearson"] = r.pearson;
        d["n"] = r.n;
        return d;
      },
      py::arg("truth"), py::arg("pred"));
}
