#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gnnsde/tensor.hpp"

namespace gnnsde {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;  // same shape as value
};

/// Ordered, named collection of learnable matrices.
class ParamSet {
 public:
  Parameter& add(std::string name, Matrix value);

  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::vector<Parameter>& items() noexcept { return items_; }
  const std::vector<Parameter>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  std::size_t scalar_count() const noexcept;

  void zero_grad();

  bool operator==(const ParamSet& other) const;

 private:
  std::vector<Parameter> items_;
};

/// Glorot/Xavier uniform sample in +-sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(Eigen::Index fan_in, Eigen::Index fan_out, std::mt19937_64& rng);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moment buffers are created lazily to match the
/// parameter shapes the first time step() sees them.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  /// Applies one update from the gradients in `params`, then zeroes them.
  void step(ParamSet& params);

  std::uint64_t step_count() const noexcept { return steps_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  AdamConfig config_;
  std::uint64_t steps_ = 0;
  std::vector<Matrix> first_moment_;
  std::vector<Matrix> second_moment_;
};

// Binary container: magic "GNNSDE01", then per tensor
//   u32 name length | name bytes | u64 rows | u64 cols | rows*cols f64 (row-major)
// All integers and floats little-endian. Entries run to end of stream.
inline constexpr std::string_view kParamMagic = "GNNSDE01";

void write_params(const ParamSet& params, std::ostream& out);
ParamSet read_params(std::istream& in);
void save_params(const ParamSet& params, const std::string& path);
ParamSet load_params(const std::string& path);

}  // namespace gnnsde
