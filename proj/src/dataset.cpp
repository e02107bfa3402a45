#include "gnnsde/dataset.hpp"

#include <numeric>
#include <ostream>
#include <random>

#include "gnnsde/error.hpp"
#include "gnnsde/sssp.hpp"

namespace gnnsde {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

PresetSplit preset_split(std::string_view preset) {
  if (preset == "1k" || preset == "2k") return {10, 6400, 1600, 64};
  if (preset == "3k" || preset == "4k") return {10, 3200, 800, 32};
  if (preset == "10k" || preset == "20k") return {5, 2500, 500, 16};
  if (preset == "50k" || preset == "100k") return {5, 2500, 500, 4};
  throw ValidationError("unknown size preset '" + std::string(preset) + "'");
}

DatasetSpec DatasetSpec::from_preset(std::string_view preset, bool full, std::uint64_t seed) {
  const auto split = preset_split(preset);
  DatasetSpec spec;
  spec.preset = std::string(preset);
  spec.topologies = split.topologies;
  spec.train_topologies = static_cast<std::size_t>(std::llround(
      static_cast<double>(split.topologies * split.train_samples) /
      static_cast<double>(split.train_samples + split.test_samples)));
  const std::size_t divisor = full ? 1 : kDeskScaleDivisor;
  spec.train_samples = split.train_samples / divisor;
  spec.test_samples = split.test_samples / divisor;
  spec.batch_size = split.batch_size;
  spec.seed = seed;
  return spec;
}

void DatasetSpec::validate() const {
  preset_node_count(preset);
  if (topologies < 1) throw ValidationError("dataset needs at least one topology");
  if (train_topologies > topologies) throw ValidationError("train_topologies exceeds topologies");
  if (train_samples > 0 && train_topologies == 0) throw ValidationError("train samples requested without train topologies");
  if (test_samples > 0 && train_topologies == topologies) throw ValidationError("test samples requested without test topologies");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
}

std::vector<Graph> Dataset::graphs() const {
  std::vector<Graph> out;
  out.reserve(topologies.size());
  for (const auto& t : topologies) out.push_back(t.graph);
  return out;
}

namespace {

std::size_t share(std::size_t total, std::size_t parts, std::size_t index) {
  return total / parts + (index < total % parts ? 1 : 0);
}

}  // namespace

Dataset build_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.spec = spec;
  const std::size_t test_topologies = spec.topologies - spec.train_topologies;
  for (std::size_t id = 0; id < spec.topologies; ++id) {
    Topology topo;
    topo.id = id;
    topo.train = id < spec.train_topologies;
    topo.config = size_preset(spec.preset, derive_seed(spec.seed, id));
    topo.graph = generate(topo.config);

    const std::size_t wanted = topo.train ? share(spec.train_samples, spec.train_topologies, id)
                                          : share(spec.test_samples, test_topologies, id - spec.train_topologies);
    const auto n = topo.graph.node_count();
    if (wanted > n) {
      throw ValidationError("topology " + std::to_string(id) + " has " + std::to_string(n) + " nodes but " +
                            std::to_string(wanted) + " sources were requested");
    }
    std::mt19937_64 rng(derive_seed(spec.seed, 0x5000 + id));
    std::vector<NodeId> pool(n);
    std::iota(pool.begin(), pool.end(), 0u);
    for (std::size_t i = 0; i < wanted; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    auto& bucket = topo.train ? ds.train : ds.test;
    for (std::size_t i = 0; i < wanted; ++i) {
      TrainSample sample;
      sample.topology = id;
      sample.source = pool[i];
      sample.dist = dijkstra(topo.graph, sample.source).dist;
      sample.hops = bfs_hops(topo.graph, sample.source);
      bucket.push_back(std::move(sample));
    }
    ds.topologies.push_back(std::move(topo));
  }
  return ds;
}

void write_manifest_csv(const Dataset& dataset, std::ostream& out) {
  out << "split,topology,source\n";
  for (const auto& s : dataset.train) out << "train," << s.topology << ',' << s.source << '\n';
  for (const auto& s : dataset.test) out << "test," << s.topology << ',' << s.source << '\n';
}

}  // namespace gnnsde
