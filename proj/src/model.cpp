#include "gnnsde/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "gnnsde/error.hpp"
#include "gnnsde/sssp.hpp"

namespace gnnsde {

namespace {

std::string layer_name(const char* block, int index, const char* what) {
  return std::string(block) + "." + std::to_string(index) + "." + what;
}

RowGroups group_by_destination(const Graph& graph, bool by_edge) {
  RowGroups groups;
  groups.offsets.reserve(graph.node_count() + 1);
  groups.indices.reserve(graph.edge_count());
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    for (EdgeId e : graph.in_edges(v)) groups.indices.push_back(by_edge ? e : graph.edge(e).from);
    groups.offsets.push_back(static_cast<std::uint32_t>(groups.indices.size()));
  }
  return groups;
}

/// Embedding MLP: every layer followed by ReLU.
Tensor embed(Tensor x, const BoundParams& p, const char* block, int depth) {
  for (int i = 0; i < depth; ++i) {
    x = relu(linear(x, p[layer_name(block, i, "W")], p[layer_name(block, i, "b")]));
  }
  return x;
}

}  // namespace

void ModelConfig::validate() const {
  if (hidden < 1) throw ValidationError("hidden width must be >= 1");
  if (layers < 0) throw ValidationError("message-passing layer count must be >= 0");
  if (mlp_depth < 1) throw ValidationError("MLP depth must be >= 1");
}

TopologyContext::TopologyContext(Graph graph, DistanceScale scale) : graph_(std::move(graph)) {
  const auto normalized = normalize_coords(graph_);
  normalized_.assign(normalized.coords().begin(), normalized.coords().end());
  if (scale == DistanceScale::BoundingBoxDiagonal) {
    const double diag = bounding_box_diagonal(graph_);
    distance_scale_ = diag > 0.0 ? diag : 1.0;
  }
  edge_feats_.resize(static_cast<Eigen::Index>(graph_.edge_count()), kEdgeFeatureWidth);
  for (EdgeId e = 0; e < graph_.edge_count(); ++e) edge_feats_(e, 0) = graph_.edge(e).weight / distance_scale_;
  in_neighbors_ = group_by_destination(graph_, false);
  in_edges_ = group_by_destination(graph_, true);
}

FeatureSet TopologyContext::features(NodeId source) const { return features(source, bfs_hops(graph_, source)); }

FeatureSet TopologyContext::features(NodeId source, std::span<const std::uint32_t> hops) const {
  const auto n = graph_.node_count();
  if (source >= n) throw ValidationError("source " + std::to_string(source) + " out of range");
  if (hops.size() != n) throw ValidationError("hop array length mismatch");
  std::uint32_t max_hop = 0;
  for (auto h : hops) {
    if (h != kUnreachableHops) max_hop = std::max(max_hop, h);
  }
  if (max_hop == 0) throw ValidationError("source " + std::to_string(source) + " reaches no other node");

  FeatureSet fs;
  fs.source = source;
  fs.distance_scale = distance_scale_;
  fs.edge_feats = edge_feats_;
  fs.node_feats.resize(static_cast<Eigen::Index>(n), kNodeFeatureWidth);
  fs.reachable_mask.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    const bool reachable = hops[v] != kUnreachableHops;
    fs.reachable_mask[v] = reachable ? 1 : 0;
    fs.node_feats(v, 0) = reachable ? static_cast<double>(hops[v]) / max_hop : 1.0;
    fs.node_feats(v, 1) = normalized_[v].x;
    fs.node_feats(v, 2) = normalized_[v].y;
  }
  return fs;
}

FeatureSet build_features(const Graph& graph, NodeId source, DistanceScale scale) {
  return TopologyContext(graph, scale).features(source);
}

ModelParams ModelParams::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  ModelParams mp{config, {}};
  const Eigen::Index h = config.hidden;
  auto add_mlp = [&](const char* block, Eigen::Index in, Eigen::Index out_last) {
    for (int i = 0; i < config.mlp_depth; ++i) {
      const Eigen::Index fan_in = i == 0 ? in : h;
      const Eigen::Index fan_out = i + 1 == config.mlp_depth ? out_last : h;
      mp.params.add(layer_name(block, i, "W"), glorot_uniform(fan_in, fan_out, rng));
      mp.params.add(layer_name(block, i, "b"), Matrix::Zero(1, fan_out));
    }
  };
  add_mlp("node_embed", kNodeFeatureWidth, h);
  add_mlp("edge_embed", kEdgeFeatureWidth, h);
  for (int k = 0; k < config.layers; ++k) {
    mp.params.add(layer_name("mp", k, "W"), glorot_uniform(3 * h, h, rng));
    mp.params.add(layer_name("mp", k, "b"), Matrix::Zero(1, h));
  }
  mp.params.add("proj.s", Matrix::Constant(1, config.layers + 1, 1.0 / (config.layers + 1)));
  add_mlp("head", 2 * h, 1);
  return mp;
}

ModelParams ModelParams::zeros(const ModelConfig& config) {
  auto mp = init(config, 0);
  for (auto& p : mp.params.items()) p.value.setZero();
  return mp;
}

ParamSet ModelParams::to_container() const {
  ParamSet out = params;
  out.add("meta.final_relu", Matrix::Constant(1, 1, config.final_activation == FinalActivation::Relu ? 1.0 : 0.0));
  out.add("meta.unit_scale", Matrix::Constant(1, 1, config.distance_scale == DistanceScale::Unit ? 1.0 : 0.0));
  return out;
}

ModelParams ModelParams::from_container(const ParamSet& container) {
  ModelParams mp;
  auto count_layers = [&](const std::string& block) {
    int n = 0;
    while (container.contains(layer_name(block.c_str(), n, "W"))) ++n;
    return n;
  };
  mp.config.mlp_depth = count_layers("node_embed");
  mp.config.layers = count_layers("mp");
  if (mp.config.mlp_depth == 0) throw ValidationError("parameter container has no node_embed layers");
  mp.config.hidden = static_cast<int>(container.at("node_embed.0.W").value.cols());
  if (container.contains("meta.final_relu")) {
    mp.config.final_activation = container.at("meta.final_relu").value(0, 0) != 0.0 ? FinalActivation::Relu
                                                                                      : FinalActivation::Identity;
  }
  if (container.contains("meta.unit_scale")) {
    mp.config.distance_scale = container.at("meta.unit_scale").value(0, 0) != 0.0 ? DistanceScale::Unit
                                                                                  : DistanceScale::BoundingBoxDiagonal;
  }
  // Check every expected tensor is present with the expected shape.
  const auto reference = init(mp.config, 0);
  for (const auto& p : reference.params.items()) {
    const auto& q = container.at(p.name);
    if (q.value.rows() != p.value.rows() || q.value.cols() != p.value.cols()) {
      throw ValidationError("parameter '" + p.name + "' has inconsistent shape");
    }
    mp.params.add(p.name, q.value);
  }
  return mp;
}

void ModelParams::save(const std::string& path) const { save_params(to_container(), path); }

ModelParams ModelParams::load(const std::string& path) { return from_container(load_params(path)); }

BoundParams::BoundParams(const ParamSet& params, bool requires_grad) {
  names_.reserve(params.size());
  leaves_.reserve(params.size());
  for (const auto& p : params.items()) {
    names_.push_back(p.name);
    leaves_.push_back(requires_grad ? Tensor::variable(p.value) : Tensor::constant(p.value));
  }
}

const Tensor& BoundParams::operator[](std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return leaves_[i];
  }
  throw ValidationError("unbound parameter '" + std::string(name) + "'");
}

void BoundParams::accumulate_into(ParamSet& params) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (leaves_[i].requires_grad()) params.at(names_[i]).grad += leaves_[i].grad();
  }
}

namespace model {

Tensor edge_aggregate(const TopologyContext& ctx, const BoundParams& p, const ModelConfig& config) {
  const Tensor edges = embed(Tensor::constant(ctx.edge_feats()), p, "edge_embed", config.mlp_depth);
  return mean_rows(edges, ctx.in_edges());
}

Tensor final_embedding(const TopologyContext& ctx, const Matrix& node_feats, const Tensor& edge_agg,
                       const BoundParams& p, const ModelConfig& config) {
  std::vector<Tensor> layers;
  layers.reserve(static_cast<std::size_t>(config.layers) + 1);
  layers.push_back(embed(Tensor::constant(node_feats), p, "node_embed", config.mlp_depth));
  for (int k = 0; k < config.layers; ++k) {
    const Tensor& h = layers.back();
    const Tensor neighbors = mean_rows(h, ctx.in_neighbors());
    const Tensor update = concat_cols({h, neighbors, edge_agg});
    layers.push_back(relu(linear(update, p[layer_name("mp", k, "W")], p[layer_name("mp", k, "b")])));
  }
  Tensor combined = weighted_sum(layers, p["proj.s"]);
  return config.final_activation == FinalActivation::Relu ? relu(combined) : combined;
}

Tensor predict_rows(const Tensor& h_final, std::span<const std::uint32_t> rows, NodeId source,
                    const BoundParams& p, const ModelConfig& config) {
  const std::vector<std::uint32_t> source_rows(rows.size(), source);
  Tensor x = concat_cols({gather_rows(h_final, rows), gather_rows(h_final, source_rows)});
  for (int i = 0; i < config.mlp_depth; ++i) {
    x = linear(x, p[layer_name("head", i, "W")], p[layer_name("head", i, "b")]);
    if (i + 1 < config.mlp_depth) x = relu(x);
  }
  return x;
}

Tensor forward_tensor(const TopologyContext& ctx, const FeatureSet& features, const BoundParams& p,
                      const ModelConfig& config) {
  const Tensor edge_agg = edge_aggregate(ctx, p, config);
  const Tensor h_final = final_embedding(ctx, features.node_feats, edge_agg, p, config);
  std::vector<std::uint32_t> rows(ctx.graph().node_count());
  std::iota(rows.begin(), rows.end(), 0u);
  return predict_rows(h_final, rows, features.source, p, config);
}

}  // namespace model

std::vector<double> forward(const Graph& graph, const FeatureSet& features, const ModelParams& params) {
  const Predictor predictor(graph, params);
  return predictor.predict_scaled(features);
}

std::vector<double> node_weights(std::span<const double> dist, double clamp_lo, double clamp_hi) {
  std::vector<double> w(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (std::isinf(dist[i])) {
      w[i] = 0.0;
    } else if (dist[i] <= 0.0) {
      w[i] = clamp_hi;
    } else {
      w[i] = std::clamp(1.0 / dist[i], clamp_lo, clamp_hi);
    }
  }
  return w;
}

double loss(std::span<const LossTerm> batch) {
  if (batch.empty()) throw ValidationError("loss: empty batch");
  double total = 0.0;
  for (const auto& term : batch) {
    const auto n = term.pred.size();
    if (term.truth.size() != n || term.weights.size() != n || term.mask.size() != n) {
      throw ValidationError("loss: array lengths differ");
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!term.mask[i]) continue;
      sum += term.weights[i] * std::abs(term.truth[i] - term.pred[i]);
      ++count;
    }
    if (count == 0) throw ValidationError("loss: empty mask");
    total += sum / static_cast<double>(count);
  }
  return total / static_cast<double>(batch.size());
}

void TrainConfig::validate() const {
  model.validate();
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (!(lr > 0.0)) throw ValidationError("lr must be > 0");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(mask_fraction > 0.0 && mask_fraction <= 1.0)) throw ValidationError("mask_fraction must be in (0, 1]");
  if (!(clamp_lo <= clamp_hi) || !(clamp_lo > 0.0)) throw ValidationError("need 0 < clamp_lo <= clamp_hi");
}

namespace {

struct PreparedSample {
  std::size_t topology;
  FeatureSet features;
  std::vector<std::uint32_t> reachable;  // candidate rows for the loss mask
  Matrix target;                          // |V| x 1, model units
  Matrix weights;                         // |V| x 1
};

std::vector<std::uint32_t> sample_mask(const std::vector<std::uint32_t>& reachable, double fraction,
                                       std::mt19937_64& rng) {
  const auto k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(reachable.size()))));
  std::vector<std::uint32_t> pool = reachable;
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

Matrix select_rows(const Matrix& column, std::span<const std::uint32_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i), 0) = column(rows[i], 0);
  return out;
}

}  // namespace

TrainResult train(std::span<const Graph> graphs, std::span<const TrainSample> samples, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (samples.empty()) throw ValidationError("train: no samples");

  std::vector<TopologyContext> contexts;
  contexts.reserve(graphs.size());
  for (const auto& g : graphs) contexts.emplace_back(g, config.model.distance_scale);

  std::vector<PreparedSample> prepared;
  prepared.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.topology >= contexts.size()) throw ValidationError("train: sample references a missing topology");
    const auto& ctx = contexts[s.topology];
    if (s.dist.size() != ctx.graph().node_count()) throw ValidationError("train: distance array length mismatch");
    PreparedSample ps{s.topology, ctx.features(s.source, s.hops), {}, {}, {}};
    const auto n = static_cast<Eigen::Index>(s.dist.size());
    ps.target.resize(n, 1);
    std::vector<double> scaled(s.dist.size());
    for (std::size_t v = 0; v < s.dist.size(); ++v) {
      scaled[v] = s.dist[v] / ps.features.distance_scale;
      const bool usable = ps.features.reachable_mask[v] && std::isfinite(s.dist[v]);
      ps.target(static_cast<Eigen::Index>(v), 0) = usable ? scaled[v] : 0.0;
      if (usable) ps.reachable.push_back(static_cast<std::uint32_t>(v));
    }
    const auto w = node_weights(scaled, config.clamp_lo, config.clamp_hi);
    ps.weights = Eigen::Map<const Matrix>(w.data(), n, 1);
    prepared.push_back(std::move(ps));
  }

  std::mt19937_64 rng(config.seed);
  TrainResult result{ModelParams::init(config.model, rng()), {}, 0};
  ModelParams current = result.params;
  Adam adam(AdamConfig{config.lr});
  double best = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(prepared.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      const BoundParams bound(current.params, true);

      // Edge aggregation depends only on the topology: run it once per
      // topology in this batch and feed samples a detached copy whose
      // gradient is pushed back through the edge MLP afterwards.
      std::vector<std::size_t> topo_ids;
      std::vector<Tensor> edge_aggs, detached;
      auto slot_of = [&](std::size_t topo) {
        auto it = std::find(topo_ids.begin(), topo_ids.end(), topo);
        if (it != topo_ids.end()) return static_cast<std::size_t>(it - topo_ids.begin());
        topo_ids.push_back(topo);
        edge_aggs.push_back(model::edge_aggregate(contexts[topo], bound, config.model));
        detached.push_back(Tensor::variable(edge_aggs.back().value()));
        return topo_ids.size() - 1;
      };

      for (std::size_t i = start; i < stop; ++i) {
        const auto& ps = prepared[order[i]];
        const auto slot = slot_of(ps.topology);
        const auto rows = sample_mask(ps.reachable, config.mask_fraction, rng);
        const Tensor h_final =
            model::final_embedding(contexts[ps.topology], ps.features.node_feats, detached[slot], bound, config.model);
        const Tensor pred = model::predict_rows(h_final, rows, ps.features.source, bound, config.model);
        const Matrix target = select_rows(ps.target, rows);
        const Matrix weights = select_rows(ps.weights, rows);
        const Tensor term = weighted_abs_error(pred, target, weights, Matrix::Ones(target.rows(), 1));
        term.backward(Matrix::Constant(1, 1, inv_batch));
        epoch_total += term.value()(0, 0);
      }
      for (std::size_t slot = 0; slot < topo_ids.size(); ++slot) {
        edge_aggs[slot].backward(detached[slot].grad());
      }
      bound.accumulate_into(current.params);
      adam.step(current.params);
    }
    const double epoch_loss = epoch_total / static_cast<double>(order.size());
    result.loss_history.push_back(epoch_loss);
    if (epoch_loss < best) {
      best = epoch_loss;
      result.best_epoch = static_cast<std::size_t>(epoch);
      result.params = current;
    }
    if (on_epoch) on_epoch(static_cast<std::size_t>(epoch), epoch_loss);
  }
  return result;
}

Predictor::Predictor(const Graph& graph, const ModelParams& params)
    : ctx_(graph, params.config.distance_scale),
      params_(params),
      bound_(params_.params, false),
      edge_agg_(model::edge_aggregate(ctx_, bound_, params_.config)) {}

std::vector<double> Predictor::predict_scaled(const FeatureSet& features) const {
  const auto n = ctx_.graph().node_count();
  if (static_cast<std::size_t>(features.node_feats.rows()) != n) {
    throw ValidationError("feature matrix does not match the graph");
  }
  const Tensor h_final = model::final_embedding(ctx_, features.node_feats, edge_agg_, bound_, params_.config);
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  const Tensor out = model::predict_rows(h_final, rows, features.source, bound_, params_.config);
  return std::vector<double>(out.value().data(), out.value().data() + n);
}

std::vector<double> Predictor::predict(const FeatureSet& features) const {
  auto out = predict_scaled(features);
  for (auto& d : out) d = std::max(0.0, d) * features.distance_scale;
  return out;
}

std::vector<double> Predictor::predict(NodeId source) const { return predict(ctx_.features(source)); }

std::vector<double> predict_sssd(const Graph& graph, NodeId source, const ModelParams& params) {
  return Predictor(graph, params).predict(source);
}

}  // namespace gnnsde
