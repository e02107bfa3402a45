#include "gnnsde/params.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "gnnsde/error.hpp"

namespace gnnsde {

Parameter& ParamSet::add(std::string name, Matrix value) {
  if (contains(name)) throw ValidationError("duplicate parameter '" + name + "'");
  Matrix grad = Matrix::Zero(value.rows(), value.cols());
  items_.push_back({std::move(name), std::move(value), std::move(grad)});
  return items_.back();
}

Parameter& ParamSet::at(std::string_view name) {
  auto it = std::find_if(items_.begin(), items_.end(), [&](const Parameter& p) { return p.name == name; });
  if (it == items_.end()) throw ValidationError("missing parameter '" + std::string(name) + "'");
  return *it;
}

const Parameter& ParamSet::at(std::string_view name) const { return const_cast<ParamSet*>(this)->at(name); }

bool ParamSet::contains(std::string_view name) const {
  return std::any_of(items_.begin(), items_.end(), [&](const Parameter& p) { return p.name == name; });
}

std::size_t ParamSet::scalar_count() const noexcept {
  std::size_t total = 0;
  for (const auto& p : items_) total += static_cast<std::size_t>(p.value.size());
  return total;
}

void ParamSet::zero_grad() {
  for (auto& p : items_) p.grad.setZero();
}

bool ParamSet::operator==(const ParamSet& other) const {
  if (items_.size() != other.items_.size()) return false;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto& a = items_[i];
    const auto& b = other.items_[i];
    if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) return false;
    if (a.value.size() != 0 &&
        std::memcmp(a.value.data(), b.value.data(), sizeof(double) * static_cast<std::size_t>(a.value.size())) != 0) {
      return false;
    }
  }
  return true;
}

Matrix glorot_uniform(Eigen::Index fan_in, Eigen::Index fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(fan_in, fan_out);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

void Adam::step(ParamSet& params) {
  auto& items = params.items();
  if (first_moment_.size() != items.size()) {
    first_moment_.clear();
    second_moment_.clear();
    for (const auto& p : items) {
      first_moment_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
      second_moment_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    }
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto& p = items[i];
    auto m = first_moment_[i].array();
    auto v = second_moment_[i].array();
    const auto g = p.grad.array();
    m = config_.beta1 * m + (1.0 - config_.beta1) * g;
    v = config_.beta2 * v + (1.0 - config_.beta2) * g.square();
    p.value.array() -= config_.lr * (m / correction1) / ((v / correction2).sqrt() + config_.eps);
    p.grad.setZero();
  }
}

namespace {

static_assert(std::endian::native == std::endian::little, "parameter container assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& value) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&value), sizeof(T)));
}

}  // namespace

void write_params(const ParamSet& params, std::ostream& out) {
  out.write(kParamMagic.data(), static_cast<std::streamsize>(kParamMagic.size()));
  for (const auto& p : params.items()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(p.value.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(p.value.cols()));
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(p.value.size())));
  }
}

ParamSet read_params(std::istream& in) {
  std::string magic(kParamMagic.size(), '\0');
  if (!in.read(magic.data(), static_cast<std::streamsize>(magic.size())) || magic != kParamMagic) {
    throw ValidationError("not a parameter container (bad magic)");
  }
  ParamSet params;
  std::uint32_t name_len = 0;
  while (get(in, name_len)) {
    if (name_len > 4096) throw ValidationError("corrupt parameter container (name length)");
    std::string name(name_len, '\0');
    std::uint64_t rows = 0, cols = 0;
    if (!in.read(name.data(), name_len) || !get(in, rows) || !get(in, cols)) {
      throw ValidationError("truncated parameter container");
    }
    if (rows > (1u << 24) || cols > (1u << 24)) throw ValidationError("corrupt parameter container (shape)");
    Matrix value(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if (!in.read(reinterpret_cast<char*>(value.data()),
                 static_cast<std::streamsize>(sizeof(double) * rows * cols))) {
      throw ValidationError("truncated parameter container");
    }
    params.add(std::move(name), std::move(value));
  }
  return params;
}

void save_params(const ParamSet& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write parameter file '" + path + "'");
  write_params(params, out);
}

ParamSet load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open parameter file '" + path + "'");
  return read_params(in);
}

}  // namespace gnnsde
