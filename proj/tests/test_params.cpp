#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gnnsde/error.hpp"
#include "gnnsde/params.hpp"

using namespace gnnsde;

TEST_CASE("adam: first step moves by lr in the gradient sign") {
  ParamSet p;
  p.add("x", Matrix::Constant(1, 2, 1.0));
  p.at("x").grad << 5.0, -0.01;
  Adam adam(AdamConfig{.lr = 1e-3});
  adam.step(p);
  CHECK(p.at("x").value(0, 0) == doctest::Approx(1.0 - 1e-3).epsilon(1e-9));
  CHECK(p.at("x").value(0, 1) == doctest::Approx(1.0 + 1e-3).epsilon(1e-6));
  CHECK(p.at("x").grad.isZero());
  CHECK(adam.step_count() == 1);
}

TEST_CASE("adam: zero gradient leaves the parameter unchanged") {
  ParamSet p;
  p.add("x", Matrix::Constant(2, 2, 0.25));
  Adam adam;
  for (int i = 0; i < 5; ++i) adam.step(p);
  CHECK(p.at("x").value.isApprox(Matrix::Constant(2, 2, 0.25), 0.0));
}

TEST_CASE("adam: descends x^2") {
  ParamSet p;
  p.add("x", Matrix::Constant(1, 1, 3.0));
  Adam adam(AdamConfig{.lr = 0.05});
  for (int i = 0; i < 2000; ++i) {
    p.at("x").grad(0, 0) = 2.0 * p.at("x").value(0, 0);
    adam.step(p);
  }
  CHECK(std::abs(p.at("x").value(0, 0)) < 0.05);
}

TEST_CASE("glorot bounds") {
  std::mt19937_64 rng(3);
  const auto w = glorot_uniform(10, 30, rng);
  const double bound = std::sqrt(6.0 / 40.0);
  CHECK(w.rows() == 10);
  CHECK(w.cols() == 30);
  CHECK(w.cwiseAbs().maxCoeff() <= bound);
  CHECK(w.cwiseAbs().maxCoeff() > 0.5 * bound);
}

TEST_CASE("param container round-trip is bit exact") {
  std::mt19937_64 rng(4);
  ParamSet p;
  p.add("a.W", glorot_uniform(3, 4, rng));
  p.add("b", Matrix::Constant(1, 1, 0.1 + 0.2));
  p.add("empty", Matrix(0, 5));
  std::stringstream buf;
  write_params(p, buf);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 8) == "GNNSDE01");
  // 8 magic + per entry 4 + name + 16 + 8*size
  CHECK(bytes.size() == 8 + (4 + 3 + 16 + 96) + (4 + 1 + 16 + 8) + (4 + 5 + 16));
  const auto q = read_params(buf);
  CHECK(q == p);
  std::stringstream again;
  write_params(q, again);
  CHECK(again.str() == bytes);
}

TEST_CASE("param container rejects damage") {
  ParamSet p;
  p.add("w", Matrix::Ones(2, 2));
  std::stringstream buf;
  write_params(p, buf);
  const std::string bytes = buf.str();
  std::stringstream bad_magic("GNNSDE02" + bytes.substr(8));
  CHECK_THROWS_AS(read_params(bad_magic), ValidationError);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_params(truncated), ValidationError);
  CHECK_THROWS_AS(p.add("w", Matrix::Ones(1, 1)), ValidationError);
  CHECK_THROWS_AS(p.at("missing"), ValidationError);
}

TEST_CASE("adam: 100 steps on x^2 from 1 shrink |x| every step") {
  ParamSet p;
  p.add("x", Matrix::Constant(1, 1, 1.0));
  Adam adam;
  double previous = 1.0;
  for (int i = 0; i < 100; ++i) {
    p.at("x").grad(0, 0) = 2.0 * p.at("x").value(0, 0);
    adam.step(p);
    const double now = std::abs(p.at("x").value(0, 0));
    CHECK(now < previous);
    previous = now;
  }
}
