#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "gnnsde/graph.hpp"

namespace gnnsde {

enum class LandmarkStrategy { Random, Farthest };

LandmarkStrategy parse_landmark_strategy(std::string_view name);

/// 2% of |V| below 10k nodes, 0.5% from 10k up; at least one.
std::size_t landmark_count_rule(std::size_t node_count);

/// Random: seeded sample without replacement. Farthest: start at `start`
/// (or a seeded node), then repeatedly add the node whose distance from the
/// current set is largest (unreachable counts as infinitely far; ties go to
/// the smaller id). Throws ValidationError unless 1 <= count <= |V|.
std::vector<NodeId> select_landmarks(const Graph& graph, std::size_t count, LandmarkStrategy strategy,
                                     std::uint64_t seed, std::optional<NodeId> start = std::nullopt);

/// Triangle-inequality distance oracle. estimate(s, t) is an upper bound on
/// the exact s->t distance.
class LandmarkIndex {
 public:
  LandmarkIndex() = default;
  static LandmarkIndex build(const Graph& graph, std::vector<NodeId> landmarks);

  /// min over landmarks L of d(s, L) + d(L, t); +inf when no landmark links them.
  double estimate(NodeId s, NodeId t) const;
  /// estimate(s, t) for every t.
  std::vector<double> estimate_all(NodeId s) const;

  const std::vector<NodeId>& landmarks() const noexcept { return landmarks_; }
  std::size_t node_count() const noexcept { return node_count_; }
  /// L -> v distances of landmark slot i.
  const std::vector<double>& dist_from(std::size_t i) const { return dist_from_[i]; }
  /// v -> L distances of landmark slot i.
  const std::vector<double>& dist_to(std::size_t i) const { return dist_to_[i]; }

  /// Writes "source,node,dist,pred,hops" rows; per landmark a forward block
  /// and a reverse block, each preceded by a '# landmark <id> from|to' line.
  void write_csv(const Graph& graph, std::ostream& out) const;
  static LandmarkIndex read_csv(std::istream& in);

 private:
  std::vector<NodeId> landmarks_;
  std::size_t node_count_ = 0;
  std::vector<std::vector<double>> dist_from_;
  std::vector<std::vector<double>> dist_to_;
  std::vector<std::vector<NodeId>> pred_from_;
  std::vector<std::vector<NodeId>> pred_to_;
};

}  // namespace gnnsde
