#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gnnsde {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

struct TensorNode {
  Matrix value;
  Matrix grad;  // empty until something flows into it
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<TensorNode>> parents;
  // Reads this->grad and accumulates into the parents that require grad.
  std::function<void(TensorNode&)> backward;

  /// Gradient buffer, zero-initialized on first use.
  Matrix& grad_ref();
};

}  // namespace detail

/// Handle to a node of a dynamically built computation graph.
///
/// Tensors are cheap to copy (shared ownership). Intermediate nodes stay
/// alive as long as some downstream tensor references them, so dropping the
/// loss tensor frees the whole graph.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Matrix value);
  /// Leaf that accumulates gradients.
  static Tensor variable(Matrix value);

  bool defined() const noexcept { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  bool requires_grad() const { return node_->requires_grad; }
  const char* op() const { return node_->op; }

  /// Gradient accumulated so far; a zero matrix if nothing has flowed in.
  Matrix grad() const;
  void zero_grad();

  /// Seeds d(this)/d(this) = 1 for a 1x1 tensor and back-propagates.
  void backward() const;
  /// Back-propagates an arbitrary upstream gradient of this tensor's shape.
  void backward(const Matrix& seed) const;

  /// Calls `fn` on every node reachable from this one, in topological order
  /// (inputs before outputs).
  void visit(const std::function<void(const Tensor&)>& fn) const;

  /// Builds a result node. Used by the op implementations.
  static Tensor make(Matrix value, const char* op, std::vector<Tensor> inputs,
                     std::function<void(detail::TensorNode&)> backward);

  detail::TensorNode& node() const { return *node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}
  std::vector<std::shared_ptr<detail::TensorNode>> topo_order() const;

  std::shared_ptr<detail::TensorNode> node_;
};

/// CSR row groups: group g covers indices[offsets[g] .. offsets[g+1]).
struct RowGroups {
  std::vector<std::uint32_t> offsets{0};
  std::vector<std::uint32_t> indices;

  std::size_t size() const noexcept { return offsets.size() - 1; }
};

// Ops. Every op checks shapes and throws ValidationError on mismatch.

Tensor matmul(const Tensor& a, const Tensor& b);
/// input [n x p] * W [p x q] + b [1 x q] broadcast over rows.
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);
Tensor relu(const Tensor& input);
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& input, double factor);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_cols(std::initializer_list<Tensor> parts);
/// Row g of the result is the mean of input rows in group g (zero row when
/// the group is empty).
Tensor mean_rows(const Tensor& input, const RowGroups& groups);
/// Result row i is input row indices[i]; repeated indices accumulate.
Tensor gather_rows(const Tensor& input, std::span<const std::uint32_t> indices);
/// Sum over l of weights(0, l) * layers[l]; weights is 1 x L.
Tensor weighted_sum(std::span<const Tensor> layers, const Tensor& weights);
/// sum(mask * weights * |pred - target|) / count(mask != 0), as a 1x1 tensor.
/// All four are n x 1. Throws ValidationError when the mask is empty.
Tensor weighted_abs_error(const Tensor& pred, const Matrix& target, const Matrix& weights, const Matrix& mask);

}  // namespace gnnsde
