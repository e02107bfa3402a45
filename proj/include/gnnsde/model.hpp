#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gnnsde/graph.hpp"
#include "gnnsde/params.hpp"
#include "gnnsde/tensor.hpp"

namespace gnnsde {

/// How raw edge weights and distances are brought to model units.
enum class DistanceScale {
  BoundingBoxDiagonal,  // divide by the diagonal of the raw coordinate bounding box
  Unit,                 // leave as-is
};

enum class FinalActivation { Relu, Identity };

struct ModelConfig {
  int hidden = 64;
  /// Number of message-passing steps K.
  int layers = 3;
  /// Depth of the node/edge embedding MLPs and of the prediction head.
  int mlp_depth = 3;
  FinalActivation final_activation = FinalActivation::Relu;
  DistanceScale distance_scale = DistanceScale::BoundingBoxDiagonal;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

inline constexpr int kNodeFeatureWidth = 3;
inline constexpr int kEdgeFeatureWidth = 1;

/// Model inputs for one source node.
struct FeatureSet {
  NodeId source = 0;
  /// |V| x 3: [hops(s, v) / max finite hop, normalized x(v), normalized y(v)].
  /// Unreachable nodes carry a hop feature of 1.
  Matrix node_feats;
  /// |E| x 1: edge weight divided by the distance scale.
  Matrix edge_feats;
  std::vector<std::uint8_t> reachable_mask;
  /// Raw distance = model distance * distance_scale.
  double distance_scale = 1.0;
};

/// Source-independent preprocessing of one topology: normalized coordinates,
/// edge features and the aggregation groups used by message passing.
class TopologyContext {
 public:
  TopologyContext(Graph graph, DistanceScale scale);

  const Graph& graph() const noexcept { return graph_; }
  double distance_scale() const noexcept { return distance_scale_; }
  const Matrix& edge_feats() const noexcept { return edge_feats_; }
  /// Per node v, the sources u of its incoming edges u->v (one entry per edge).
  const RowGroups& in_neighbors() const noexcept { return in_neighbors_; }
  /// Per node v, the ids of its incoming edges.
  const RowGroups& in_edges() const noexcept { return in_edges_; }

  /// Throws ValidationError if the source reaches no other node.
  FeatureSet features(NodeId source) const;
  FeatureSet features(NodeId source, std::span<const std::uint32_t> hops) const;

 private:
  Graph graph_;
  std::vector<Point> normalized_;
  double distance_scale_ = 1.0;
  Matrix edge_feats_;
  RowGroups in_neighbors_;
  RowGroups in_edges_;
};

FeatureSet build_features(const Graph& graph, NodeId source,
                          DistanceScale scale = DistanceScale::BoundingBoxDiagonal);

/// Learnable tensors of the model plus the architecture they belong to.
struct ModelParams {
  ModelConfig config;
  ParamSet params;

  /// Glorot-uniform weights, zero biases, projection vector 1/(K+1).
  static ModelParams init(const ModelConfig& config, std::uint64_t seed);
  static ModelParams zeros(const ModelConfig& config);

  /// Container view, including the architecture switches as "meta.*" entries.
  ParamSet to_container() const;
  static ModelParams from_container(const ParamSet& container);
  void save(const std::string& path) const;
  static ModelParams load(const std::string& path);

  bool operator==(const ModelParams&) const = default;
};

/// Leaf tensors bound to the values of a ParamSet for one forward pass.
class BoundParams {
 public:
  BoundParams(const ParamSet& params, bool requires_grad);

  const Tensor& operator[](std::string_view name) const;
  /// Adds the gradients collected on the leaves into `params`.
  void accumulate_into(ParamSet& params) const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> leaves_;
};

namespace model {

/// Mean over incoming edges of the edge embeddings, |V| x hidden. Depends on
/// the topology only, so callers may reuse it across sources.
Tensor edge_aggregate(const TopologyContext& ctx, const BoundParams& p, const ModelConfig& config);

/// Node embedding after K message-passing steps and the layer projection.
Tensor final_embedding(const TopologyContext& ctx, const Matrix& node_feats, const Tensor& edge_agg,
                       const BoundParams& p, const ModelConfig& config);

/// Head over concat(h_final(v), h_final(source)) for each v in rows; rows x 1.
Tensor predict_rows(const Tensor& h_final, std::span<const std::uint32_t> rows, NodeId source,
                    const BoundParams& p, const ModelConfig& config);

/// Full pass for every node, as a |V| x 1 tensor in model units.
Tensor forward_tensor(const TopologyContext& ctx, const FeatureSet& features, const BoundParams& p,
                      const ModelConfig& config);

}  // namespace model

/// Predicted distances for every node in model (scaled) units.
std::vector<double> forward(const Graph& graph, const FeatureSet& features, const ModelParams& params);

/// Loss weights: clamp(1/d, lo, hi); d = 0 maps to hi; unreachable (inf) maps to 0.
std::vector<double> node_weights(std::span<const double> dist, double clamp_lo = 0.1, double clamp_hi = 1.0);

/// One sample's masked weighted L1 term divided by its masked-in count.
struct LossTerm {
  std::span<const double> pred;
  std::span<const double> truth;
  std::span<const double> weights;
  std::span<const std::uint8_t> mask;
};

/// Batch mean of per-sample masked weighted mean absolute errors. Throws
/// ValidationError if any sample's mask is empty.
double loss(std::span<const LossTerm> batch);

struct TrainConfig {
  int epochs = 100;
  double lr = 1e-3;
  int batch_size = 64;
  double mask_fraction = 0.3;
  double clamp_lo = 0.1;
  double clamp_hi = 1.0;
  std::uint64_t seed = 0;
  ModelConfig model;

  void validate() const;
};

struct TrainSample {
  std::size_t topology = 0;
  NodeId source = 0;
  std::vector<double> dist;  // raw units, from dijkstra
  std::vector<std::uint32_t> hops;
};

struct TrainResult {
  ModelParams params;                // best epoch by training loss
  std::vector<double> loss_history;  // mean sample loss per epoch
  std::size_t best_epoch = 0;        // 0-based
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Mini-batch Adam training. Deterministic for a fixed config.seed.
TrainResult train(std::span<const Graph> graphs, std::span<const TrainSample> samples, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Repeated inference on one topology; the edge aggregation is computed once.
class Predictor {
 public:
  Predictor(const Graph& graph, const ModelParams& params);

  /// Distances from `source` in raw units; negative outputs clamp to 0.
  std::vector<double> predict(NodeId source) const;
  std::vector<double> predict(const FeatureSet& features) const;
  /// Raw model output in scaled units.
  std::vector<double> predict_scaled(const FeatureSet& features) const;

  const TopologyContext& context() const noexcept { return ctx_; }

 private:
  TopologyContext ctx_;
  ModelParams params_;
  BoundParams bound_;
  Tensor edge_agg_;
};

std::vector<double> predict_sssd(const Graph& graph, NodeId source, const ModelParams& params);

}  // namespace gnnsde
