#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gnnsde/graph.hpp"
#include "gnnsde/model.hpp"
#include "gnnsde/synth.hpp"

namespace gnnsde {

/// Deterministic sub-seed for stream `stream` of a run seeded with `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// One column of the synthetic training table, by preset name.
struct PresetSplit {
  std::size_t topologies = 0;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  int batch_size = 0;
};

PresetSplit preset_split(std::string_view preset);

/// Desk runs divide sample counts by this factor unless `full` is set.
inline constexpr std::size_t kDeskScaleDivisor = 10;

struct DatasetSpec {
  std::string preset = "1k";
  std::size_t topologies = 10;
  /// The first `train_topologies` ids are training graphs, the rest test.
  std::size_t train_topologies = 8;
  std::size_t train_samples = 640;
  std::size_t test_samples = 160;
  int batch_size = 64;
  std::uint64_t seed = 0;

  /// Table sizes for the preset; sample counts divided by 10 unless full.
  static DatasetSpec from_preset(std::string_view preset, bool full, std::uint64_t seed);
  void validate() const;
};

struct Topology {
  std::size_t id = 0;
  bool train = true;
  SynthConfig config;
  Graph graph;
};

struct Dataset {
  DatasetSpec spec;
  std::vector<Topology> topologies;
  std::vector<TrainSample> train;  // topology indexes into `topologies`
  std::vector<TrainSample> test;

  std::vector<Graph> graphs() const;
};

/// Generates the topologies, samples distinct sources per topology and
/// computes dijkstra + hop ground truth. Throws ValidationError if a topology
/// has fewer nodes than the sources requested from it.
Dataset build_dataset(const DatasetSpec& spec);

/// "split,topology,source" rows, train first, in sample order.
void write_manifest_csv(const Dataset& dataset, std::ostream& out);

}  // namespace gnnsde
