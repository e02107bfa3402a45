#include "gnnsde/tensor.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "gnnsde/error.hpp"

namespace gnnsde {

namespace detail {

Matrix& TensorNode::grad_ref() {
  if (grad.size() == 0) grad = Matrix::Zero(value.rows(), value.cols());
  return grad;
}

}  // namespace detail

namespace {

std::string shape_str(const Matrix& m) {
  return "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "]";
}

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  throw ValidationError(std::string(op) + ": shape mismatch " + detail);
}

detail::TensorNode& parent(detail::TensorNode& node, std::size_t i) { return *node.parents[i]; }

}  // namespace

Tensor Tensor::constant(Matrix value) {
  auto node = std::make_shared<detail::TensorNode>();
  node->value = std::move(value);
  return Tensor(std::move(node));
}

Tensor Tensor::variable(Matrix value) {
  auto node = std::make_shared<detail::TensorNode>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Tensor(std::move(node));
}

Tensor Tensor::make(Matrix value, const char* op, std::vector<Tensor> inputs,
                    std::function<void(detail::TensorNode&)> backward) {
  auto node = std::make_shared<detail::TensorNode>();
  node->value = std::move(value);
  node->op = op;
  node->requires_grad = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
  // Parents are always kept so the graph can be inspected; the backward
  // closure is dropped when nothing upstream needs a gradient.
  node->parents.reserve(inputs.size());
  for (auto& t : inputs) node->parents.push_back(std::move(t.node_));
  if (node->requires_grad) node->backward = std::move(backward);
  return Tensor(std::move(node));
}

Matrix Tensor::grad() const {
  if (node_->grad.size() == 0) return Matrix::Zero(node_->value.rows(), node_->value.cols());
  return node_->grad;
}

void Tensor::zero_grad() { node_->grad.resize(0, 0); }

std::vector<std::shared_ptr<detail::TensorNode>> Tensor::topo_order() const {
  std::vector<std::shared_ptr<detail::TensorNode>> order;
  std::unordered_set<const detail::TensorNode*> seen;
  // Iterative post-order DFS.
  std::vector<std::pair<std::shared_ptr<detail::TensorNode>, std::size_t>> stack;
  stack.emplace_back(node_, 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      auto child = node->parents[next++];
      if (seen.insert(child.get()).second) stack.emplace_back(std::move(child), 0);
    } else {
      order.push_back(std::move(node));
      stack.pop_back();
    }
  }
  return order;
}

void Tensor::backward() const {
  if (node_->value.rows() != 1 || node_->value.cols() != 1) {
    throw ValidationError("backward() without a seed needs a 1x1 tensor, got " + shape_str(node_->value));
  }
  backward(Matrix::Ones(1, 1));
}

void Tensor::backward(const Matrix& seed) const {
  if (seed.rows() != node_->value.rows() || seed.cols() != node_->value.cols()) {
    shape_error("backward", "seed " + shape_str(seed) + " vs " + shape_str(node_->value));
  }
  if (!node_->requires_grad) return;
  const auto order = topo_order();
  node_->grad_ref() += seed;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto& node = **it;
    if (node.backward && node.grad.size() != 0) node.backward(node);
  }
}

void Tensor::visit(const std::function<void(const Tensor&)>& fn) const {
  for (auto& node : topo_order()) fn(Tensor(node));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_error("matmul", shape_str(a.value()) + " * " + shape_str(b.value()));
  Matrix out = a.value() * b.value();
  return Tensor::make(std::move(out), "matmul", {a, b}, [](detail::TensorNode& self) {
    auto& pa = parent(self, 0);
    auto& pb = parent(self, 1);
    if (pa.requires_grad) pa.grad_ref().noalias() += self.grad * pb.value.transpose();
    if (pb.requires_grad) pb.grad_ref().noalias() += pa.value.transpose() * self.grad;
  });
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  if (input.cols() != weight.rows() || bias.rows() != 1 || bias.cols() != weight.cols()) {
    shape_error("linear", shape_str(input.value()) + " * " + shape_str(weight.value()) + " + " +
                              shape_str(bias.value()));
  }
  Matrix out(input.rows(), weight.cols());
  out.noalias() = input.value() * weight.value();
  out.rowwise() += bias.value().row(0);
  return Tensor::make(std::move(out), "linear", {input, weight, bias}, [](detail::TensorNode& self) {
    auto& px = parent(self, 0);
    auto& pw = parent(self, 1);
    auto& pb = parent(self, 2);
    if (px.requires_grad) px.grad_ref().noalias() += self.grad * pw.value.transpose();
    if (pw.requires_grad) pw.grad_ref().noalias() += px.value.transpose() * self.grad;
    if (pb.requires_grad) pb.grad_ref() += self.grad.colwise().sum();
  });
}

Tensor relu(const Tensor& input) {
  Matrix out = input.value().cwiseMax(0.0);
  return Tensor::make(std::move(out), "relu", {input}, [](detail::TensorNode& self) {
    auto& px = parent(self, 0);
    // Subgradient at 0 is 0.
    px.grad_ref().array() += (px.value.array() > 0.0).select(self.grad.array(), 0.0);
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    shape_error("add", shape_str(a.value()) + " + " + shape_str(b.value()));
  }
  Matrix out = a.value() + b.value();
  return Tensor::make(std::move(out), "add", {a, b}, [](detail::TensorNode& self) {
    for (std::size_t i = 0; i < 2; ++i) {
      auto& p = parent(self, i);
      if (p.requires_grad) p.grad_ref() += self.grad;
    }
  });
}

Tensor scale(const Tensor& input, double factor) {
  Matrix out = input.value() * factor;
  return Tensor::make(std::move(out), "scale", {input}, [factor](detail::TensorNode& self) {
    parent(self, 0).grad_ref() += factor * self.grad;
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ValidationError("concat_cols: no inputs");
  const auto rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) shape_error("concat_cols", "row counts differ");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  return Tensor::make(std::move(out), "concat_cols", std::vector<Tensor>(parts.begin(), parts.end()),
                      [](detail::TensorNode& self) {
                        Eigen::Index off = 0;
                        for (auto& p : self.parents) {
                          const auto c = p->value.cols();
                          if (p->requires_grad) p->grad_ref() += self.grad.middleCols(off, c);
                          off += c;
                        }
                      });
}

Tensor concat_cols(std::initializer_list<Tensor> parts) {
  return concat_cols(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor mean_rows(const Tensor& input, const RowGroups& groups) {
  if (groups.offsets.empty() || groups.offsets.back() != groups.indices.size()) {
    throw ValidationError("mean_rows: malformed row groups");
  }
  const auto& x = input.value();
  for (auto idx : groups.indices) {
    if (idx >= x.rows()) shape_error("mean_rows", "group index " + std::to_string(idx) + " >= rows");
  }
  const auto g_count = static_cast<Eigen::Index>(groups.size());
  Matrix out = Matrix::Zero(g_count, x.cols());
  for (Eigen::Index g = 0; g < g_count; ++g) {
    const auto lo = groups.offsets[g], hi = groups.offsets[g + 1];
    if (lo == hi) continue;
    auto row = out.row(g);
    for (auto k = lo; k < hi; ++k) row += x.row(groups.indices[k]);
    row /= static_cast<double>(hi - lo);
  }
  // The groups are copied into the closure; graphs outlive caller scopes.
  return Tensor::make(std::move(out), "mean_rows", {input}, [groups](detail::TensorNode& self) {
    auto& gx = parent(self, 0).grad_ref();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto lo = groups.offsets[g], hi = groups.offsets[g + 1];
      if (lo == hi) continue;
      const double inv = 1.0 / static_cast<double>(hi - lo);
      for (auto k = lo; k < hi; ++k) gx.row(groups.indices[k]) += inv * self.grad.row(static_cast<Eigen::Index>(g));
    }
  });
}

Tensor gather_rows(const Tensor& input, std::span<const std::uint32_t> indices) {
  const auto& x = input.value();
  Matrix out(static_cast<Eigen::Index>(indices.size()), x.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= x.rows()) shape_error("gather_rows", "index " + std::to_string(indices[i]) + " >= rows");
    out.row(static_cast<Eigen::Index>(i)) = x.row(indices[i]);
  }
  std::vector<std::uint32_t> idx(indices.begin(), indices.end());
  return Tensor::make(std::move(out), "gather_rows", {input}, [idx = std::move(idx)](detail::TensorNode& self) {
    auto& gx = parent(self, 0).grad_ref();
    for (std::size_t i = 0; i < idx.size(); ++i) gx.row(idx[i]) += self.grad.row(static_cast<Eigen::Index>(i));
  });
}

Tensor weighted_sum(std::span<const Tensor> layers, const Tensor& weights) {
  if (layers.empty()) throw ValidationError("weighted_sum: no layers");
  if (weights.rows() != 1 || weights.cols() != static_cast<Eigen::Index>(layers.size())) {
    shape_error("weighted_sum", "weights " + shape_str(weights.value()) + " for " + std::to_string(layers.size()) +
                                    " layers");
  }
  const auto& first = layers.front().value();
  Matrix out = Matrix::Zero(first.rows(), first.cols());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].rows() != first.rows() || layers[l].cols() != first.cols()) {
      shape_error("weighted_sum", "layer shapes differ");
    }
    out += weights.value()(0, static_cast<Eigen::Index>(l)) * layers[l].value();
  }
  std::vector<Tensor> inputs(layers.begin(), layers.end());
  inputs.push_back(weights);
  return Tensor::make(std::move(out), "weighted_sum", std::move(inputs), [](detail::TensorNode& self) {
    const auto layer_count = self.parents.size() - 1;
    auto& pw = *self.parents.back();
    for (std::size_t l = 0; l < layer_count; ++l) {
      auto& pl = *self.parents[l];
      const auto li = static_cast<Eigen::Index>(l);
      if (pl.requires_grad) pl.grad_ref() += pw.value(0, li) * self.grad;
      if (pw.requires_grad) pw.grad_ref()(0, li) += self.grad.cwiseProduct(pl.value).sum();
    }
  });
}

Tensor weighted_abs_error(const Tensor& pred, const Matrix& target, const Matrix& weights, const Matrix& mask) {
  const auto& p = pred.value();
  auto same = [&](const Matrix& m) { return m.rows() == p.rows() && m.cols() == p.cols(); };
  if (p.cols() != 1 || !same(target) || !same(weights) || !same(mask)) {
    shape_error("weighted_abs_error", "pred " + shape_str(p) + ", target " + shape_str(target) + ", weights " +
                                          shape_str(weights) + ", mask " + shape_str(mask));
  }
  const double count = (mask.array() != 0.0).count();
  if (count == 0.0) throw ValidationError("weighted_abs_error: mask selects no entries");
  const Eigen::ArrayXXd coeff = mask.array() * weights.array() / count;
  Matrix out(1, 1);
  out(0, 0) = (coeff * (p - target).array().abs()).sum();
  Matrix slope = (coeff * (p - target).array().sign()).matrix();
  return Tensor::make(std::move(out), "weighted_abs_error", {pred},
                      [slope = std::move(slope)](detail::TensorNode& self) {
                        parent(self, 0).grad_ref() += self.grad(0, 0) * slope;
                      });
}

}  // namespace gnnsde
