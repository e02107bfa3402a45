#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gnnsde/bench.hpp"
#include "gnnsde/dataset.hpp"
#include "gnnsde/error.hpp"
#include "gnnsde/graph.hpp"
#include "gnnsde/hazard.hpp"
#include "gnnsde/landmark.hpp"
#include "gnnsde/metrics.hpp"
#include "gnnsde/model.hpp"
#include "gnnsde/pathfinder.hpp"
#include "gnnsde/sssp.hpp"
#include "gnnsde/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gnnsde;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string config_path;
  std::string out = ".";
};

json load_config(const Globals& g) {
  if (g.config_path.empty()) return json::object();
  std::ifstream in(g.config_path);
  if (!in) throw ValidationError("cannot open config '" + g.config_path + "'");
  try {
    auto cfg = json::parse(in);
    if (!cfg.is_object()) throw ValidationError("config must be a JSON object");
    return cfg;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

template <class T>
void take(const json& cfg, const char* key, T& slot) {
  if (!cfg.contains(key)) return;
  try {
    slot = cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config key '") + key + "': " + e.what());
  }
}

fs::path out_dir(const Globals& g) {
  fs::path dir(g.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_json(const fs::path& path, const json& j) { open_out(path) << j.dump(2) << '\n'; }

DatasetSpec dataset_spec(const json& cfg, const std::string& preset, bool full, std::uint64_t seed) {
  auto spec = DatasetSpec::from_preset(cfg.value("preset", preset), cfg.value("full", full), seed);
  take(cfg, "topologies", spec.topologies);
  take(cfg, "train_topologies", spec.train_topologies);
  take(cfg, "train_samples", spec.train_samples);
  take(cfg, "test_samples", spec.test_samples);
  if (cfg.contains("samples_per_topology")) {
    const auto per = cfg.at("samples_per_topology").get<std::size_t>();
    spec.train_samples = per * spec.train_topologies;
    spec.test_samples = per * (spec.topologies - spec.train_topologies);
  }
  take(cfg, "batch_size", spec.batch_size);
  spec.validate();
  return spec;
}

TrainConfig train_config(const json& cfg, const DatasetSpec& spec, std::uint64_t seed) {
  TrainConfig tc;
  tc.batch_size = spec.batch_size;
  tc.seed = seed;
  take(cfg, "epochs", tc.epochs);
  take(cfg, "lr", tc.lr);
  take(cfg, "batch_size", tc.batch_size);
  take(cfg, "mask_fraction", tc.mask_fraction);
  take(cfg, "clamp_lo", tc.clamp_lo);
  take(cfg, "clamp_hi", tc.clamp_hi);
  take(cfg, "hidden", tc.model.hidden);
  take(cfg, "layers", tc.model.layers);
  take(cfg, "mlp_depth", tc.model.mlp_depth);
  if (cfg.contains("final_activation")) {
    const auto act = cfg.at("final_activation").get<std::string>();
    if (act == "relu") {
      tc.model.final_activation = FinalActivation::Relu;
    } else if (act == "identity") {
      tc.model.final_activation = FinalActivation::Identity;
    } else {
      throw ValidationError("final_activation must be relu or identity");
    }
  }
  if (cfg.contains("distance_scale")) {
    const auto scale = cfg.at("distance_scale").get<std::string>();
    if (scale == "bbox_diagonal") {
      tc.model.distance_scale = DistanceScale::BoundingBoxDiagonal;
    } else if (scale == "unit") {
      tc.model.distance_scale = DistanceScale::Unit;
    } else {
      throw ValidationError("distance_scale must be bbox_diagonal or unit");
    }
  }
  tc.validate();
  return tc;
}

void write_loss_history(const fs::path& path, const std::vector<double>& history) {
  auto out = open_out(path);
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < history.size(); ++e) out << e << ',' << fmt(history[e]) << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> distance_field(const std::string& backend, const Graph& graph, NodeId source,
                                   const std::string& model_path, std::uint64_t seed) {
  if (backend == "exact") return dijkstra(graph, source).dist;
  if (backend == "gnn") {
    if (model_path.empty()) throw ValidationError("--model is required for the gnn backend");
    return predict_sssd(graph, source, ModelParams::load(model_path));
  }
  if (backend == "landmark") {
    const auto landmarks = select_landmarks(graph, landmark_count_rule(graph.node_count()),
                                            LandmarkStrategy::Farthest, seed);
    return LandmarkIndex::build(graph, landmarks).estimate_all(source);
  }
  throw ValidationError("unknown backend '" + backend + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GNN-based single-source shortest distance estimation toolkit"};
  app.require_subcommand(1);
  Globals globals;
  app.add_option("--seed", globals.seed, "Base random seed")->capture_default_str();
  app.add_option("--config", globals.config_path, "JSON config file");
  app.add_option("--out", globals.out, "Output directory")->capture_default_str();

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic road network");
  std::string gen_preset = "1k";
  std::optional<int> gen_rows, gen_cols;
  std::string gen_file = "graph.txt";
  gen->add_option("--preset", gen_preset, "Size preset")->capture_default_str();
  gen->add_option("--rows", gen_rows, "Grid rows (overrides the preset)");
  gen->add_option("--cols", gen_cols, "Grid columns (overrides the preset)");
  gen->add_option("--file", gen_file, "Output file name inside --out")->capture_default_str();

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Build a train/test dataset and its manifest");
  std::string ds_preset = "1k";
  bool ds_full = false;
  dataset->add_option("--preset", ds_preset)->capture_default_str();
  dataset->add_flag("--full", ds_full, "Full-size sample counts");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model from a JSON run config");
  std::string tr_preset = "1k";
  bool tr_full = false;
  std::optional<int> tr_epochs;
  train_cmd->add_option("--preset", tr_preset)->capture_default_str();
  train_cmd->add_flag("--full", tr_full);
  train_cmd->add_option("--epochs", tr_epochs, "Override the epoch count");

  // eval
  auto* eval = app.add_subcommand("eval", "Ground truth or model predictions for a graph");
  std::string ev_graph, ev_model;
  std::vector<NodeId> ev_sources;
  bool ev_oracle = false;
  eval->add_option("--graph", ev_graph, "Edge-list file")->required();
  eval->add_option("--model", ev_model, "Parameter file");
  eval->add_option("--source", ev_sources, "Source node(s); all nodes when omitted");
  eval->add_flag("--oracle", ev_oracle, "Write dijkstra ground truth instead of predictions");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Compare dijkstra, landmark and gnn on a preset");
  std::vector<std::string> bn_presets{"2k"};
  std::vector<std::string> bn_methods{"dijkstra", "landmark", "gnn"};
  std::string bn_model;
  bool bn_full = false;
  std::optional<int> bn_epochs;
  std::string bn_strategy = "farthest";
  bench_cmd->add_option("--preset", bn_presets, "One or more presets")->capture_default_str();
  bench_cmd->add_option("--methods", bn_methods)->capture_default_str();
  bench_cmd->add_option("--model", bn_model, "Trained parameters; otherwise trains on the preset");
  bench_cmd->add_flag("--full", bn_full);
  bench_cmd->add_option("--epochs", bn_epochs, "Epochs when training inside bench");
  bench_cmd->add_option("--landmark-strategy", bn_strategy)->capture_default_str();

  // flood
  auto* flood = app.add_subcommand("flood", "Evacuation delay ratios under a flood scenario");
  std::string fl_before, fl_mask, fl_shelters, fl_backend = "exact", fl_model, fl_label = "flood";
  double fl_factor = 1.0 / 3.0;
  flood->add_option("--before", fl_before, "Pre-flood edge list (weights are travel times)")->required();
  flood->add_option("--mask", fl_mask, "Flood mask file")->required();
  flood->add_option("--shelters", fl_shelters, "Shelter list file")->required();
  flood->add_option("--backend", fl_backend)->check(CLI::IsMember({"exact", "gnn"}))->capture_default_str();
  flood->add_option("--model", fl_model);
  flood->add_option("--speed-factor", fl_factor)->capture_default_str();
  flood->add_option("--label", fl_label)->capture_default_str();

  // route
  auto* route = app.add_subcommand("route", "Recommend a route from a distance field");
  std::string rt_graph, rt_model, rt_mode = "consistent", rt_backend = "gnn";
  NodeId rt_from = 0, rt_to = 0;
  route->add_option("--graph", rt_graph)->required();
  route->add_option("--from", rt_from)->required();
  route->add_option("--to", rt_to)->required();
  route->add_option("--mode", rt_mode)->check(CLI::IsMember({"faithful", "consistent"}))->capture_default_str();
  route->add_option("--backend", rt_backend)->check(CLI::IsMember({"gnn", "exact", "landmark"}))->capture_default_str();
  route->add_option("--model", rt_model);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const json cfg = load_config(globals);

    if (*gen) {
      auto config = size_preset(cfg.value("preset", gen_preset), globals.seed);
      if (gen_rows) config.rows = *gen_rows;
      if (gen_cols) config.cols = *gen_cols;
      take(cfg, "rows", config.rows);
      take(cfg, "cols", config.cols);
      take(cfg, "node_drop_prob", config.node_drop_prob);
      take(cfg, "edge_drop_prob", config.edge_drop_prob);
      take(cfg, "diagonal_prob", config.diagonal_prob);
      take(cfg, "coord_jitter", config.coord_jitter);
      const auto g = generate(config);
      const auto path = out_dir(globals) / gen_file;
      save_edge_list(g, path.string());
      std::cout << path.string() << ": " << g.node_count() << " nodes, " << g.edge_count() << " edges\n";
    } else if (*dataset) {
      const auto spec = dataset_spec(cfg, ds_preset, ds_full, globals.seed);
      const auto ds = build_dataset(spec);
      const auto dir = out_dir(globals);
      auto manifest = open_out(dir / "manifest.csv");
      write_manifest_csv(ds, manifest);
      json topo = json::array();
      for (const auto& t : ds.topologies) {
        const auto name = "topology_" + std::to_string(t.id) + ".txt";
        save_edge_list(t.graph, (dir / name).string());
        topo.push_back({{"id", t.id}, {"split", t.train ? "train" : "test"}, {"file", name},
                        {"nodes", t.graph.node_count()}, {"edges", t.graph.edge_count()}});
      }
      write_json(dir / "dataset.json", {{"preset", spec.preset}, {"seed", spec.seed},
                                        {"train_samples", spec.train_samples}, {"test_samples", spec.test_samples},
                                        {"batch_size", spec.batch_size}, {"topologies", topo}});
      std::cout << "wrote " << ds.train.size() << " train and " << ds.test.size() << " test samples to "
                << dir.string() << '\n';
    } else if (*train_cmd) {
      const auto spec = dataset_spec(cfg, tr_preset, tr_full, globals.seed);
      auto tc = train_config(cfg, spec, globals.seed);
      if (tr_epochs) tc.epochs = *tr_epochs;
      tc.validate();
      const auto ds = build_dataset(spec);
      const auto graphs = ds.graphs();
      const auto t0 = std::chrono::steady_clock::now();
      const auto result = train(graphs, ds.train, tc, [](std::size_t epoch, double loss) {
        std::cerr << "epoch " << epoch + 1 << " loss " << fmt(loss) << '\n';
      });
      const double train_seconds = seconds_since(t0);
      const auto dir = out_dir(globals);
      result.params.save((dir / "params.bin").string());
      write_loss_history(dir / "loss_history.csv", result.loss_history);

      std::vector<double> truth, pred;
      for (const auto& s : ds.test) {
        const auto est = predict_sssd(graphs[s.topology], s.source, result.params);
        for (std::size_t v = 0; v < s.dist.size(); ++v) {
          if (v == s.source || s.dist[v] == kInf) continue;
          truth.push_back(s.dist[v]);
          pred.push_back(est[v]);
        }
      }
      json meta{{"preset", spec.preset}, {"seed", globals.seed}, {"epochs", tc.epochs},
                {"best_epoch", result.best_epoch}, {"train_seconds", train_seconds},
                {"train_samples", ds.train.size()}, {"test_samples", ds.test.size()}};
      if (!truth.empty()) {
        const auto m = metrics(truth, pred);
        meta["test"] = {{"mape", m.mape}, {"pearson", m.pearson}, {"n", m.n}};
      }
      write_json(dir / "train_meta.json", meta);
      std::cout << "best epoch " << result.best_epoch + 1 << ", loss "
                << fmt(result.loss_history[result.best_epoch]) << ", " << fmt(train_seconds) << " s\n";
    } else if (*eval) {
      const auto g = load_edge_list(ev_graph);
      if (ev_sources.empty()) {
        for (NodeId v = 0; v < g.node_count(); ++v) ev_sources.push_back(v);
      }
      const auto dir = out_dir(globals);
      if (ev_oracle) {
        auto out = open_out(dir / "oracle.csv");
        out << kSsspCsvHeader << '\n';
        for (NodeId s : ev_sources) write_sssp_csv_rows(out, dijkstra(g, s), bfs_hops(g, s));
      } else {
        if (ev_model.empty()) throw ValidationError("eval needs --model or --oracle");
        const Predictor predictor(g, ModelParams::load(ev_model));
        auto out = open_out(dir / "predictions.csv");
        out << "source,node,truth,pred\n";
        std::vector<double> truth, pred;
        for (NodeId s : ev_sources) {
          const auto exact = dijkstra(g, s).dist;
          const auto est = predictor.predict(s);
          for (NodeId v = 0; v < g.node_count(); ++v) {
            if (exact[v] == kInf) continue;
            out << s << ',' << v << ',' << fmt(exact[v]) << ',' << fmt(est[v]) << '\n';
            if (v == s) continue;
            truth.push_back(exact[v]);
            pred.push_back(est[v]);
          }
        }
        const auto m = metrics(truth, pred);
        const double scale = bounding_box_diagonal(g) > 0 ? bounding_box_diagonal(g) : 1.0;
        write_json(dir / "metrics.json",
                   {{"mae", m.mae / scale}, {"mape", m.mape}, {"pearson", m.pearson}, {"n", m.n}});
        std::cout << "MAPE " << fmt(100.0 * m.mape) << "%, Pearson " << fmt(m.pearson) << '\n';
      }
    } else if (*bench_cmd) {
      std::vector<Method> methods;
      for (const auto& m : bn_methods) methods.push_back(parse_method(m));
      std::optional<ModelParams> loaded;
      if (!bn_model.empty()) loaded = ModelParams::load(bn_model);
      std::vector<BenchResult> results;
      for (const auto& preset : bn_presets) {
        const auto spec = dataset_spec(cfg, preset, bn_full, globals.seed);
        const auto ds = build_dataset(spec);
        const auto graphs = ds.graphs();
        BenchOptions opts;
        opts.methods = methods;
        opts.seed = globals.seed;
        opts.label = preset;
        opts.landmark_strategy = parse_landmark_strategy(bn_strategy);
        ModelParams trained;
        if (std::find(methods.begin(), methods.end(), Method::Gnn) != methods.end()) {
          if (loaded) {
            opts.model = &*loaded;
          } else {
            auto tc = train_config(cfg, spec, globals.seed);
            if (bn_epochs) tc.epochs = *bn_epochs;
            tc.validate();
            const auto t0 = std::chrono::steady_clock::now();
            trained = train(graphs, ds.train, tc).params;
            opts.gnn_train_seconds = seconds_since(t0);
            opts.model = &trained;
          }
        }
        results.push_back(bench(graphs, make_queries(ds, globals.seed), opts));
      }
      const auto dir = out_dir(globals);
      auto table = open_out(dir / "bench.csv");
      write_bench_table(results, table);
      emit_plots(results, dir.string());
      std::ostringstream echo;
      write_bench_table(results, echo);
      std::cout << echo.str();
    } else if (*flood) {
      const auto before = load_edge_list(fl_before);
      auto scenario = load_flood_mask(fl_mask, before.node_count());
      scenario.speed_factor = fl_factor;
      scenario.label = fl_label;
      const auto shelters = load_shelters(fl_shelters, before.node_count());
      const auto after = apply_scenario(before, scenario);
      SsspBackend backend;
      std::optional<ModelParams> model;
      if (fl_backend == "gnn") {
        if (fl_model.empty()) throw ValidationError("--model is required for the gnn backend");
        model = ModelParams::load(fl_model);
        backend = gnn_backend(*model);
      } else {
        backend = exact_backend();
      }
      const auto report = delay_ratios(before, after, shelters, backend, fl_factor);
      const auto summary = summarize(report);
      const auto dir = out_dir(globals);
      auto per_node = open_out(dir / "delay.csv");
      per_node << "node,delta";
      for (NodeId s : report.shelters) per_node << ",delta_shelter_" << s;
      per_node << '\n';
      auto cell = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
      for (NodeId v = 0; v < before.node_count(); ++v) {
        per_node << v << ',' << cell(report.average[v]);
        for (const auto& row : report.per_shelter) per_node << ',' << cell(row[v]);
        per_node << '\n';
      }
      auto hist = open_out(dir / "delay_histogram.csv");
      hist << "bin_lo,bin_hi,count\n";
      for (std::size_t b = 0; b < summary.counts.size(); ++b) {
        hist << fmt(summary.bin_edges[b]) << ',' << fmt(summary.bin_edges[b + 1]) << ',' << summary.counts[b] << '\n';
      }
      write_json(dir / "delay_summary.json", {{"label", fl_label}, {"backend", fl_backend}, {"mean", summary.mean},
                                              {"max", summary.max}, {"defined", summary.count}});
      std::cout << fl_label << ": mean delay ratio " << fmt(summary.mean) << ", max " << fmt(summary.max) << '\n';
    } else if (*route) {
      const auto g = load_edge_list(rt_graph);
      const auto field = distance_field(rt_backend, g, rt_from, rt_model, globals.seed);
      const auto r = route_from_field(g, field, rt_from, rt_to, parse_predecessor_mode(rt_mode));
      const auto cumulative = cumulative_weights(g, r.nodes);
      std::cout << "step,node,cumulative_distance\n";
      for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        std::cout << i << ',' << r.nodes[i] << ',' << fmt(cumulative[i]) << '\n';
      }
      std::cerr << "estimated distance " << fmt(r.estimated_distance) << '\n';
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
