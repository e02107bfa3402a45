#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gnnsde/error.hpp"
#include "gnnsde/model.hpp"
#include "gnnsde/sssp.hpp"
#include "gnnsde/synth.hpp"
#include "support/oracles.hpp"

using namespace gnnsde;

namespace {

Graph path_graph(std::size_t n) {
  std::vector<Edge> edges;
  std::vector<Point> coords(n);
  for (NodeId v = 0; v < n; ++v) coords[v] = {static_cast<double>(v), 0.0};
  for (NodeId v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1, 1.0});
  return Graph::build(std::move(coords), edges);
}

Graph grid(int side, double jitter, std::uint64_t seed, double diagonal = 0.0) {
  SynthConfig c;
  c.rows = c.cols = side;
  c.coord_jitter = jitter;
  c.diagonal_prob = diagonal;
  c.seed = seed;
  return generate(c);
}

/// Small strongly connected graph: a directed ring plus random chords.
Graph small_graph(std::mt19937_64& rng, std::size_t n = 6) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> coords(n);
  for (auto& p : coords) p = {10.0 * unit(rng), 10.0 * unit(rng)};
  std::vector<Edge> edges;
  for (NodeId v = 0; v < n; ++v) edges.push_back({v, static_cast<NodeId>((v + 1) % n), 0.5 + unit(rng)});
  for (int i = 0; i < 4; ++i) {
    const NodeId a = static_cast<NodeId>(rng() % n), b = static_cast<NodeId>(rng() % n);
    if (a != b) edges.push_back({a, b, 0.5 + 2.0 * unit(rng)});
  }
  return Graph::build(std::move(coords), edges);
}

ModelParams random_params(const ModelConfig& config, std::mt19937_64& rng) {
  auto mp = ModelParams::init(config, rng());
  // Nonzero biases keep ReLU inputs away from exact zeros.
  for (auto& p : mp.params.items()) {
    if (p.name.back() == 'b') p.value = testing::random_matrix(p.value.rows(), p.value.cols(), rng, -0.3, 0.3);
  }
  return mp;
}

double model_loss(const TopologyContext& ctx, const FeatureSet& fs, const ParamSet& params, const ModelConfig& config,
                  const Matrix& target, const Matrix& weights, const Matrix& mask, Tensor* root = nullptr,
                  const BoundParams* bound = nullptr) {
  const BoundParams local(params, false);
  const auto& p = bound ? *bound : local;
  auto loss = weighted_abs_error(model::forward_tensor(ctx, fs, p, config), target, weights, mask);
  if (root) *root = loss;
  return loss.value()(0, 0);
}

}  // namespace

TEST_CASE("features: hop normalization and coordinates") {
  const auto g = path_graph(3);
  const auto fs = build_features(g, 0);
  CHECK(fs.node_feats(0, 0) == 0.0);
  CHECK(fs.node_feats(1, 0) == 0.5);
  CHECK(fs.node_feats(2, 0) == 1.0);
  CHECK(fs.node_feats(1, 1) == 0.5);
  CHECK(fs.node_feats(2, 1) == 1.0);
  CHECK(fs.node_feats(1, 2) == 0.0);
  CHECK(fs.source == 0);
  // Source row carries [0, x(s), y(s)].
  const auto mid = build_features(g, 1);
  CHECK(mid.node_feats(1, 0) == 0.0);
  CHECK(mid.node_feats(1, 1) == 0.5);
  CHECK(mid.reachable_mask == std::vector<std::uint8_t>{0, 1, 1});
  CHECK(mid.node_feats(0, 0) == 1.0);
  CHECK_THROWS_AS(build_features(g, 2), ValidationError);
}

TEST_CASE("features: unit grid edge features") {
  const auto fs = build_features(grid(2, 0.0, 0), 0);
  REQUIRE(fs.edge_feats.rows() == 8);
  for (Eigen::Index e = 0; e < 8; ++e) CHECK(fs.edge_feats(e, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(fs.distance_scale == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("features: translation invariance") {
  const auto g = grid(6, 0.0, 3, 0.3);
  std::vector<Point> shifted(g.coords().begin(), g.coords().end());
  for (auto& p : shifted) p = {p.x + 1024.0, p.y - 512.0};
  const auto h = g.with_coords(shifted);
  for (NodeId s : {0u, 7u}) {
    const auto a = build_features(g, s), b = build_features(h, s);
    CHECK(a.node_feats == b.node_feats);
    CHECK(a.edge_feats == b.edge_feats);
  }

  const auto jittered = grid(6, 0.3, 4, 0.3);
  std::vector<Point> moved(jittered.coords().begin(), jittered.coords().end());
  for (auto& p : moved) p = {p.x + 17.3, p.y + 101.9};
  const auto params = ModelParams::init(ModelConfig{.hidden = 16}, 1);
  const auto moved_graph = jittered.with_coords(moved);
  const auto p1 = predict_sssd(jittered, 3, params), p2 = predict_sssd(moved_graph, 3, params);
  for (std::size_t v = 0; v < p1.size(); ++v) CHECK(p1[v] == doctest::Approx(p2[v]).epsilon(1e-9));
}

TEST_CASE("zero parameters give the head bias everywhere") {
  ModelConfig config{.hidden = 8};
  auto mp = ModelParams::zeros(config);
  mp.params.at("head.2.b").value(0, 0) = 0.75;
  const auto g = grid(3, 0.1, 2);
  const auto out = forward(g, build_features(g, 4), mp);
  for (double v : out) CHECK(v == 0.75);
  const auto raw = predict_sssd(g, 4, mp);
  for (double v : raw) CHECK(v == doctest::Approx(0.75 * bounding_box_diagonal(g)));
  // Untrained zero params without a bias predict a constant 0.
  const auto flat = predict_sssd(g, 0, ModelParams::zeros(config));
  CHECK(std::all_of(flat.begin(), flat.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("node weights") {
  const double d[] = {0.0, 20.0, 4.0, 0.5, kInf};
  CHECK(node_weights(d) == std::vector<double>{1.0, 0.1, 0.25, 1.0, 0.0});
}

TEST_CASE("loss examples") {
  const double pred[] = {1.0, 2.0}, truth[] = {1.0, 2.0}, w[] = {1.0, 1.0};
  const std::uint8_t all[] = {1, 1}, none[] = {0, 0};
  const LossTerm perfect[] = {{pred, truth, w, all}};
  CHECK(loss(perfect) == 0.0);

  const double p1[] = {1.5}, t1[] = {1.0}, w1[] = {1.0};
  const std::uint8_t m1[] = {1};
  const LossTerm one[] = {{p1, t1, w1, m1}};
  CHECK(loss(one) == 0.5);

  const double pa[] = {0.2, 9.0}, ta[] = {0.0, 0.0}, wa[] = {1.0, 1.0};
  const std::uint8_t ma[] = {1, 0};
  const double pb[] = {0.4}, tb[] = {0.0}, wb[] = {1.0};
  const LossTerm batch[] = {{pa, ta, wa, ma}, {pb, tb, wb, m1}};
  CHECK(loss(batch) == doctest::Approx(0.3).epsilon(1e-15));

  const LossTerm empty[] = {{pred, truth, w, none}};
  CHECK_THROWS_AS(loss(empty), ValidationError);
}

TEST_CASE("end-to-end gradients match finite differences") {
  std::mt19937_64 rng(123);
  const ModelConfig config{.hidden = 8};
  std::size_t checked = 0, skipped = 0;
  double worst = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    const auto g = small_graph(rng);
    const TopologyContext ctx(g, config.distance_scale);
    const NodeId source = static_cast<NodeId>(rng() % g.node_count());
    const auto fs = ctx.features(source);
    const auto mp = random_params(config, rng);
    const auto n = static_cast<Eigen::Index>(g.node_count());
    const Matrix target = testing::random_matrix(n, 1, rng, 3.0, 5.0);
    const Matrix weights = testing::random_matrix(n, 1, rng, 0.1, 1.0);
    Matrix mask = Matrix::Ones(n, 1);
    mask(rng() % n, 0) = 0.0;

    const BoundParams bound(mp.params, true);
    Tensor root;
    model_loss(ctx, fs, mp.params, config, target, weights, mask, &root, &bound);
    root.backward();
    const auto pattern = testing::relu_pattern(root);
    ParamSet analytic = mp.params;
    analytic.zero_grad();
    bound.accumulate_into(analytic);

    for (const auto& param : mp.params.items()) {
      ParamSet probe = mp.params;
      auto& slot = probe.at(param.name).value;
      for (Eigen::Index i = 0; i < slot.size(); ++i) {
        const double saved = slot.data()[i];
        const double h = 1e-5;
        slot.data()[i] = saved + h;
        Tensor up_root, down_root;
        const double up = model_loss(ctx, fs, probe, config, target, weights, mask, &up_root);
        const bool up_same = testing::relu_pattern(up_root) == pattern;
        slot.data()[i] = saved - h;
        const double down = model_loss(ctx, fs, probe, config, target, weights, mask, &down_root);
        const bool down_same = testing::relu_pattern(down_root) == pattern;
        slot.data()[i] = saved;
        if (!up_same || !down_same) {
          ++skipped;
          continue;
        }
        const double numeric = (up - down) / (2.0 * h);
        const double exact = analytic.at(param.name).grad.data()[i];
        worst = std::max(worst, std::abs(numeric - exact) / std::max({std::abs(numeric), std::abs(exact), 1e-6}));
        ++checked;
      }
    }
  }
  MESSAGE("checked " << checked << " partials, skipped " << skipped << " at ReLU kinks, worst " << worst);
  CHECK(worst < 1e-4);
  CHECK(static_cast<double>(skipped) < 0.01 * static_cast<double>(checked));
}

TEST_CASE("shared edge aggregation gives the same gradient as a full pass") {
  std::mt19937_64 rng(9);
  const ModelConfig config{.hidden = 8};
  const auto g = small_graph(rng, 7);
  const TopologyContext ctx(g, config.distance_scale);
  const auto mp = random_params(config, rng);
  const auto n = static_cast<Eigen::Index>(g.node_count());
  const Matrix target = testing::random_matrix(n, 1, rng, 3.0, 5.0);
  const Matrix ones = Matrix::Ones(n, 1);

  const BoundParams direct(mp.params, true);
  for (NodeId s : {0u, 3u}) {
    weighted_abs_error(model::forward_tensor(ctx, ctx.features(s), direct, config), target, ones, ones).backward();
  }
  const BoundParams shared(mp.params, true);
  const auto agg = model::edge_aggregate(ctx, shared, config);
  const auto leaf = Tensor::variable(agg.value());
  std::vector<std::uint32_t> rows(g.node_count());
  std::iota(rows.begin(), rows.end(), 0u);
  for (NodeId s : {0u, 3u}) {
    const auto fs = ctx.features(s);
    const auto h = model::final_embedding(ctx, fs.node_feats, leaf, shared, config);
    weighted_abs_error(model::predict_rows(h, rows, s, shared, config), target, ones, ones).backward();
  }
  agg.backward(leaf.grad());

  ParamSet a = mp.params, b = mp.params;
  a.zero_grad();
  b.zero_grad();
  direct.accumulate_into(a);
  shared.accumulate_into(b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(testing::max_relative_error(a.items()[i].grad, b.items()[i].grad, 1e-12) < 1e-10);
  }
}

TEST_CASE("permutation equivariance") {
  std::mt19937_64 rng(31);
  const ModelConfig config{.hidden = 16};
  const auto mp = random_params(config, rng);
  for (int trial = 0; trial < 5; ++trial) {
    const auto g = grid(5, 0.2, static_cast<std::uint64_t>(trial), 0.4);
    const auto n = g.node_count();
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Point> coords(n);
    for (NodeId v = 0; v < n; ++v) coords[perm[v]] = g.coord(v);
    std::vector<Edge> edges;
    for (const auto& e : g.edges()) edges.push_back({perm[e.from], perm[e.to], e.weight});
    const auto h = Graph::build(std::move(coords), edges);
    const NodeId s = static_cast<NodeId>(rng() % n);
    const auto a = predict_sssd(g, s, mp), b = predict_sssd(h, perm[s], mp);
    for (NodeId v = 0; v < n; ++v) CHECK(std::abs(a[v] - b[perm[v]]) <= 1e-9 * std::max(1.0, std::abs(a[v])));
  }
}

TEST_CASE("a disconnected component leaves predictions unchanged") {
  std::mt19937_64 rng(47);
  const ModelConfig config{.hidden = 16};
  const auto mp = random_params(config, rng);
  const auto g = grid(5, 0.2, 8, 0.3);
  std::vector<Point> coords(g.coords().begin(), g.coords().end());
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  // A small triangle strictly inside the original bounding box.
  const auto base = static_cast<NodeId>(coords.size());
  coords.push_back({1.5, 1.5});
  coords.push_back({2.5, 1.5});
  coords.push_back({2.0, 2.5});
  edges.push_back({base, base + 1, 1.0});
  edges.push_back({base + 1, base + 2, 1.0});
  edges.push_back({base + 2, base, 1.0});
  const auto bigger = Graph::build(std::move(coords), edges);
  REQUIRE(bounding_box_diagonal(bigger) == bounding_box_diagonal(g));
  for (NodeId s : {0u, 12u}) {
    const auto a = predict_sssd(g, s, mp), b = predict_sssd(bigger, s, mp);
    for (NodeId v = 0; v < g.node_count(); ++v) CHECK(std::abs(a[v] - b[v]) <= 1e-12 * std::max(1.0, a[v]));
  }
}

TEST_CASE("rescaling round trip") {
  std::mt19937_64 rng(2);
  const auto mp = random_params(ModelConfig{.hidden = 16}, rng);
  const auto g = grid(4, 0.25, 5);
  const Predictor predictor(g, mp);
  const auto fs = predictor.context().features(2);
  const auto scaled = predictor.predict_scaled(fs);
  const auto raw = predictor.predict(fs);
  for (std::size_t v = 0; v < raw.size(); ++v) {
    CHECK(std::abs(raw[v] / fs.distance_scale - std::max(0.0, scaled[v])) <= 1e-12);
  }
}

TEST_CASE("parameter container round trip") {
  ModelConfig config{.hidden = 12, .layers = 2, .final_activation = FinalActivation::Identity};
  const auto mp = ModelParams::init(config, 77);
  std::stringstream buf;
  write_params(mp.to_container(), buf);
  const auto back = ModelParams::from_container(read_params(buf));
  CHECK(back == mp);
  CHECK(back.config == config);

  auto broken = mp.to_container();
  broken.at("mp.1.W").value = Matrix::Zero(3, 3);
  CHECK_THROWS_AS(ModelParams::from_container(broken), ValidationError);
}

TEST_CASE("training: smoke and determinism") {
  const auto g = grid(5, 0.2, 1, 0.2);
  std::vector<Graph> graphs{g};
  std::vector<TrainSample> samples;
  for (NodeId s : {0u, 6u, 13u}) {
    const auto r = dijkstra(g, s);
    samples.push_back({0, s, r.dist, bfs_hops(g, s)});
  }
  TrainConfig config;
  config.epochs = 1;
  config.seed = 5;
  config.model.hidden = 16;
  const std::span<const TrainSample> first(samples.data(), 1);
  const auto once = train(graphs, first, config);
  CHECK(once.loss_history.size() == 1);
  const auto initial = ModelParams::init(config.model, std::mt19937_64(config.seed)());
  CHECK(!(once.params == initial));

  config.epochs = 30;
  config.batch_size = 2;
  std::vector<std::size_t> seen;
  const auto a = train(graphs, samples, config, [&](std::size_t epoch, double) { seen.push_back(epoch); });
  const auto b = train(graphs, samples, config);
  CHECK(a.params == b.params);
  CHECK(a.loss_history == b.loss_history);
  CHECK(seen.size() == 30);
  CHECK(a.loss_history[a.best_epoch] == *std::min_element(a.loss_history.begin(), a.loss_history.end()));
  CHECK(a.loss_history.back() < a.loss_history.front());

  config.seed = 6;
  CHECK(!(train(graphs, samples, config).params == a.params));
}

TEST_CASE("training rejects bad configs and samples") {
  const auto g = path_graph(3);
  std::vector<Graph> graphs{g};
  std::vector<TrainSample> samples{{1, 0, dijkstra(g, 0).dist, bfs_hops(g, 0)}};
  TrainConfig config;
  CHECK_THROWS_AS(train(graphs, samples, config), ValidationError);
  samples[0].topology = 0;
  config.mask_fraction = 0.0;
  CHECK_THROWS_AS(train(graphs, samples, config), ValidationError);
  config.mask_fraction = 0.3;
  config.clamp_lo = 2.0;
  CHECK_THROWS_AS(train(graphs, samples, config), ValidationError);
}
