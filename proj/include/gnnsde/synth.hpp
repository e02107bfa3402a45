#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gnnsde/graph.hpp"

namespace gnnsde {

/// Randomized grid road network: jittered grid points, axis-aligned links,
/// optional hypotenuse links per cell, then i.i.d. node and edge dropout.
struct SynthConfig {
  int rows = 2;
  int cols = 2;
  double node_drop_prob = 0.0;
  double edge_drop_prob = 0.0;
  double diagonal_prob = 0.0;
  /// Uniform jitter half-width per axis, as a fraction of the unit cell.
  double coord_jitter = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const SynthConfig&) const = default;
};

/// Builds the network described by `config`, keeps the largest weakly
/// connected component and re-densifies node ids in grid order. Every
/// surviving link is emitted in both directions with its Euclidean length.
/// Throws ValidationError if fewer than 4 nodes survive.
Graph generate(const SynthConfig& config);

inline constexpr std::string_view kPresetNames[] = {"1k", "2k", "3k", "4k", "10k", "20k", "50k", "100k"};

/// Nominal node count of a preset ("2k" -> 2000).
std::size_t preset_node_count(std::string_view name);

/// Square grid sized so that ~5% node dropout lands near the nominal count.
SynthConfig size_preset(std::string_view name, std::uint64_t seed);

}  // namespace gnnsde
