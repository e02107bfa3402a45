#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "gnnsde/graph.hpp"

namespace gnnsde {

struct MetricReport {
  double mae = 0.0;
  /// Fraction, not percent. Pairs with truth == 0 are left out.
  double mape = 0.0;
  /// NaN when n < 2 or either side has zero variance.
  double pearson = 0.0;
  std::size_t n = 0;
  std::size_t zero_truth_excluded = 0;
};

/// Element-wise comparison of aligned arrays. Throws ValidationError on
/// length mismatch or empty input.
MetricReport metrics(std::span<const double> truth, std::span<const double> pred);

struct PairKey {
  NodeId source = 0;
  NodeId target = 0;
  auto operator<=>(const PairKey&) const = default;
};
using PairValues = std::map<PairKey, double>;

/// Over the keys present in both maps. Throws ValidationError when the
/// intersection is empty.
MetricReport metrics(const PairValues& truth, const PairValues& pred);

struct Histogram {
  std::vector<double> edges;  // size counts.size() + 1
  std::vector<std::size_t> counts;
};

/// Equal-width bins over [lo, hi]; out-of-range values land in the end bins.
Histogram histogram(std::span<const double> values, std::size_t bins, double lo, double hi);

}  // namespace gnnsde
