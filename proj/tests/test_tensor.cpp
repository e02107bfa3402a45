#include <random>

#include "doctest.h"
#include "gnnsde/error.hpp"
#include "gnnsde/params.hpp"
#include "gnnsde/tensor.hpp"
#include "support/oracles.hpp"

using namespace gnnsde;

namespace {

// Checks d(sum(G(op(x)) * probe))/dx for the first argument against finite differences.
void check_unary(const std::function<Tensor(const Tensor&)>& op, Matrix x, double tol = 1e-6) {
  std::mt19937_64 rng(1);
  const auto out_shape = op(Tensor::constant(x)).value();
  const Matrix probe = testing::random_matrix(out_shape.rows(), out_shape.cols(), rng);
  auto f = [&](const Matrix& m) { return op(Tensor::constant(m)).value().cwiseProduct(probe).sum(); };
  auto var = Tensor::variable(x);
  op(var).backward(probe);
  const Matrix numeric = testing::numeric_gradient(x, f);
  CHECK(testing::max_relative_error(var.grad(), numeric) < tol);
}

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST_CASE("linear forward and backward by hand") {
  auto x = Tensor::variable(mat({{2.0}}));
  auto w = Tensor::variable(mat({{3.0}}));
  auto b = Tensor::variable(mat({{1.0}}));
  const auto y = linear(x, w, b);
  CHECK(y.value()(0, 0) == 7.0);
  y.backward();
  CHECK(w.grad()(0, 0) == 2.0);
  CHECK(x.grad()(0, 0) == 3.0);
  CHECK(b.grad()(0, 0) == 1.0);
}

TEST_CASE("relu subgradient is zero at the kink") {
  auto x = Tensor::variable(mat({{-1.0, 0.0, 2.0}}));
  const auto y = relu(x);
  CHECK(y.value() == mat({{0.0, 0.0, 2.0}}));
  y.backward(mat({{1.0, 1.0, 1.0}}));
  CHECK(x.grad() == mat({{0.0, 0.0, 1.0}}));
}

TEST_CASE("mean_rows") {
  RowGroups groups;
  groups.indices = {0, 1, 2};
  groups.offsets = {0, 2, 2, 3};
  auto x = Tensor::variable(mat({{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}}));
  const auto y = mean_rows(x, groups);
  CHECK(y.value() == mat({{2.0, 3.0}, {0.0, 0.0}, {5.0, 6.0}}));
  y.backward(Matrix::Ones(3, 2));
  CHECK(x.grad() == mat({{0.5, 0.5}, {0.5, 0.5}, {1.0, 1.0}}));
}

TEST_CASE("finite-difference checks per op") {
  std::mt19937_64 rng(42);
  const Matrix a = testing::random_matrix(4, 3, rng);
  const Matrix b = testing::random_matrix(3, 5, rng);
  const Matrix c = testing::random_matrix(4, 3, rng);
  const Matrix bias = testing::random_matrix(1, 5, rng);

  check_unary([&](const Tensor& x) { return matmul(x, Tensor::constant(b)); }, a);
  check_unary([&](const Tensor& x) { return matmul(Tensor::constant(a), x); }, b);
  check_unary([&](const Tensor& x) { return linear(Tensor::constant(a), Tensor::constant(b), x); }, bias);
  check_unary([&](const Tensor& x) { return linear(x, Tensor::constant(b), Tensor::constant(bias)); }, a);
  check_unary([&](const Tensor& x) { return add(x, Tensor::constant(c)); }, a);
  check_unary([&](const Tensor& x) { return scale(x, -2.5); }, a);
  check_unary([&](const Tensor& x) { return concat_cols({Tensor::constant(c), x, x}); }, a);
  // Keep inputs away from zero so the probe does not straddle the kink.
  Matrix away = a;
  for (Eigen::Index i = 0; i < away.size(); ++i) away.data()[i] += away.data()[i] > 0 ? 0.1 : -0.1;
  check_unary([](const Tensor& x) { return relu(x); }, away);

  RowGroups groups;
  groups.indices = {3, 1, 1, 0, 2};
  groups.offsets = {0, 2, 2, 5};
  check_unary([&](const Tensor& x) { return mean_rows(x, groups); }, a);
  const std::uint32_t picks[] = {2, 0, 2, 3};
  check_unary([&](const Tensor& x) { return gather_rows(x, picks); }, a);

  const Matrix lw = testing::random_matrix(1, 3, rng);
  check_unary(
      [&](const Tensor& x) {
        const Tensor layers[] = {Tensor::constant(a), x, Tensor::constant(c)};
        return weighted_sum(layers, Tensor::constant(lw));
      },
      a);
  check_unary(
      [&](const Tensor& x) {
        const Tensor layers[] = {Tensor::constant(a), Tensor::constant(c), Tensor::constant(a)};
        return weighted_sum(layers, x);
      },
      lw);

  const Matrix pred = testing::random_matrix(6, 1, rng);
  Matrix target = pred;
  for (Eigen::Index i = 0; i < target.size(); ++i) target(i, 0) += (i % 2 ? 0.3 : -0.4);
  const Matrix weights = testing::random_matrix(6, 1, rng, 0.1, 1.0);
  const Matrix mask = mat({{1}, {0}, {1}, {1}, {0}, {1}});
  check_unary([&](const Tensor& x) { return weighted_abs_error(x, target, weights, mask); }, pred);
}

TEST_CASE("three-layer MLP gradients match finite differences") {
  std::mt19937_64 rng(8);
  const Matrix x = testing::random_matrix(5, 3, rng);
  Matrix w[3] = {glorot_uniform(3, 6, rng), glorot_uniform(6, 6, rng), glorot_uniform(6, 1, rng)};
  Matrix bvals[3] = {testing::random_matrix(1, 6, rng, -0.1, 0.1), testing::random_matrix(1, 6, rng, -0.1, 0.1),
                     testing::random_matrix(1, 1, rng, -0.1, 0.1)};
  auto forward = [&](const Matrix* override_w1) {
    Tensor h = Tensor::constant(x);
    for (int i = 0; i < 3; ++i) {
      const Matrix& wi = (i == 1 && override_w1) ? *override_w1 : w[i];
      h = linear(h, Tensor::constant(wi), Tensor::constant(bvals[i]));
      if (i < 2) h = relu(h);
    }
    return h.value().sum();
  };
  auto w1 = Tensor::variable(w[1]);
  Tensor h = Tensor::constant(x);
  h = relu(linear(h, Tensor::constant(w[0]), Tensor::constant(bvals[0])));
  h = relu(linear(h, w1, Tensor::constant(bvals[1])));
  h = linear(h, Tensor::constant(w[2]), Tensor::constant(bvals[2]));
  h.backward(Matrix::Ones(5, 1));
  const Matrix numeric = testing::numeric_gradient(w[1], [&](const Matrix& m) { return forward(&m); });
  CHECK(testing::max_relative_error(w1.grad(), numeric, 1e-4) < 1e-5);
}

TEST_CASE("shape errors") {
  const auto a = Tensor::constant(Matrix::Zero(2, 3));
  CHECK_THROWS_AS(matmul(a, a), ValidationError);
  CHECK_THROWS_AS(add(a, Tensor::constant(Matrix::Zero(3, 2))), ValidationError);
  CHECK_THROWS_AS(weighted_abs_error(Tensor::constant(Matrix::Zero(2, 1)), Matrix::Zero(2, 1), Matrix::Ones(2, 1),
                                     Matrix::Zero(2, 1)),
                  ValidationError);
}

TEST_CASE("gradients accumulate across uses and reset") {
  auto x = Tensor::variable(mat({{1.5}}));
  add(x, x).backward();
  CHECK(x.grad()(0, 0) == 2.0);
  x.zero_grad();
  CHECK(x.grad()(0, 0) == 0.0);
}

TEST_CASE("linear with identity weight and zero bias is the identity") {
  std::mt19937_64 rng(6);
  const Matrix x = testing::random_matrix(3, 4, rng);
  const auto y = linear(Tensor::constant(x), Tensor::constant(Matrix::Identity(4, 4)), Tensor::constant(Matrix::Zero(1, 4)));
  CHECK(y.value() == x);
}
