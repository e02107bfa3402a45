#include "gnnsde/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gnnsde/error.hpp"

namespace gnnsde {

MetricReport metrics(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size()) throw ValidationError("metrics: truth and prediction lengths differ");
  if (truth.empty()) throw ValidationError("metrics: no pairs to compare");
  MetricReport r;
  r.n = truth.size();
  double abs_sum = 0.0, pct_sum = 0.0;
  std::size_t pct_n = 0;
  double mean_t = 0.0, mean_p = 0.0;
  for (std::size_t i = 0; i < r.n; ++i) {
    const double err = std::abs(truth[i] - pred[i]);
    abs_sum += err;
    if (truth[i] != 0.0) {
      pct_sum += err / std::abs(truth[i]);
      ++pct_n;
    } else {
      ++r.zero_truth_excluded;
    }
    mean_t += truth[i];
    mean_p += pred[i];
  }
  const auto n = static_cast<double>(r.n);
  r.mae = abs_sum / n;
  r.mape = pct_n > 0 ? pct_sum / static_cast<double>(pct_n) : std::numeric_limits<double>::quiet_NaN();
  mean_t /= n;
  mean_p /= n;
  double cov = 0.0, var_t = 0.0, var_p = 0.0;
  for (std::size_t i = 0; i < r.n; ++i) {
    const double dt = truth[i] - mean_t, dp = pred[i] - mean_p;
    cov += dt * dp;
    var_t += dt * dt;
    var_p += dp * dp;
  }
  r.pearson = (r.n > 1 && var_t > 0.0 && var_p > 0.0) ? cov / std::sqrt(var_t * var_p)
                                                      : std::numeric_limits<double>::quiet_NaN();
  return r;
}

MetricReport metrics(const PairValues& truth, const PairValues& pred) {
  std::vector<double> t, p;
  for (const auto& [key, value] : truth) {
    if (auto it = pred.find(key); it != pred.end()) {
      t.push_back(value);
      p.push_back(it->second);
    }
  }
  if (t.empty()) throw ValidationError("metrics: truth and prediction share no pairs");
  return metrics(t, p);
}

Histogram histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
  if (bins == 0) throw ValidationError("histogram: need at least one bin");
  if (!(hi > lo)) hi = lo + 1.0;
  Histogram h;
  h.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + width * static_cast<double>(b));
  for (double v : values) {
    const double pos = std::floor((v - lo) / width);
    // NaN and +inf go to the last bin so counts always sum to values.size().
    const auto bin = pos < 0.0 ? 0 : (pos < static_cast<double>(bins) ? static_cast<std::size_t>(pos) : bins - 1);
    ++h.counts[bin];
  }
  return h;
}

}  // namespace gnnsde
