#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "ldgd/latent.hpp"
#include "ldgd/optim.hpp"

using namespace ldgd;

TEST_CASE("sample_latent") {
  RandomSource rng(41);
  const Matrix mu = rng.normal_matrix(3, 2);
  const Matrix s = (rng.normal_matrix(3, 2).array().abs() + 0.1).matrix();
  CHECK(sample_latent(mu, s, Matrix::Zero(3, 2)) == mu);

  const Index n = 100000;
  const Matrix draws = sample_latent(Matrix::Zero(n, 2), Matrix::Ones(n, 2), rng.normal_matrix(n, 2));
  for (Index q = 0; q < 2; ++q) {
    const double mean = draws.col(q).mean();
    const double var = (draws.col(q).array() - mean).square().sum() / static_cast<double>(n - 1);
    CHECK(std::abs(var - 1.0) < 0.05);
  }

  // d x / d s = eps
  const Matrix eps = rng.normal_matrix(3, 2);
  ParameterVector p;
  p.add("mu", mu);
  p.add("s", s);
  for (Index i = 0; i < 3; ++i)
    for (Index q = 0; q < 2; ++q) {
      Matrix pick = Matrix::Zero(3, 2);
      pick(i, q) = 1.0;
      const Objective f = [&](ad::Tape& t, const BoundParameters& b) {
        return ad::sum(ad::hadamard(ad::sample_latent(b["mu"], b["s"], eps), t.constant(pick)));
      };
      const Vector g = gradient(f, p);
      CHECK(g(p.block("s").offset + q * 3 + i) == doctest::Approx(eps(i, q)).epsilon(1e-14));
    }
}

TEST_CASE("kl_latent") {
  CHECK(kl_latent(Matrix::Zero(4, 3), Matrix::Ones(4, 3)) == 0.0);
  CHECK(kl_latent(Matrix::Ones(1, 1), Matrix::Ones(1, 1)) == doctest::Approx(0.5).epsilon(1e-15));

  RandomSource rng(42);
  const Matrix mu = rng.normal_matrix(5, 3);
  const Matrix s = (rng.normal_matrix(5, 3).array().abs() + 0.05).matrix();
  double oracle = 0.0;
  for (Index i = 0; i < 5; ++i) {
    const Vector var = s.row(i).transpose().array().square();
    oracle += testing::gaussian_kl(mu.row(i).transpose(), var.asDiagonal(), Vector::Zero(3), Matrix::Identity(3, 3));
  }
  CHECK(std::abs(kl_latent(mu, s) - oracle) < 1e-10);

  Eigen::PermutationMatrix<Eigen::Dynamic> perm(Eigen::Vector3i(1, 2, 0));
  CHECK(kl_latent(mu * perm, s * perm) == doctest::Approx(kl_latent(mu, s)).epsilon(1e-14));
}

TEST_CASE("encoder forward pass") {
  SUBCASE("all-zero network") {
    RandomSource rng(43);
    AmortizedEncoder e = AmortizedEncoder::initialize(4, {5, 3}, 2, rng);
    for (auto& w : e.weights) w.setZero();
    for (auto& b : e.biases) b.setZero();
    const FreeFormLatent out = encode(e, rng.normal_matrix(6, 4));
    CHECK(testing::max_abs(out.mean) == 0.0);
    CHECK(testing::max_abs(out.scale.array() - std::log(2.0)) < 1e-15);
  }
  SUBCASE("single linear layer picks out inputs") {
    AmortizedEncoder e;
    e.weights.push_back(Matrix::Identity(4, 4));
    e.biases.push_back(RowVector::Zero(4));
    RandomSource rng(44);
    const Matrix y = rng.normal_matrix(5, 4);
    const FreeFormLatent out = encode(e, y);
    CHECK(out.mean == y.leftCols(2));
    CHECK(out.scale.minCoeff() > 0.0);
  }
  SUBCASE("initialization") {
    RandomSource rng(45);
    const AmortizedEncoder e = AmortizedEncoder::initialize(10, {64, 32}, 3, rng, 0.5);
    CHECK(e.layers() == 3);
    CHECK(e.input_dims() == 10);
    CHECK(e.latent_dims() == 3);
    CHECK(testing::max_abs(e.biases.back().rightCols(3).array() - std::log(std::expm1(0.5))) < 1e-14);
    const FreeFormLatent out = encode(e, Matrix::Zero(2, 10));
    CHECK(testing::max_abs(out.scale.array() - 0.5) < 1e-14);
    CHECK_THROWS_AS(encode(e, Matrix::Zero(2, 9)), InvalidArgument);
  }
}

TEST_CASE("encoder gradients on a 3-4-4 network") {
  RandomSource rng(46);
  const AmortizedEncoder e = AmortizedEncoder::initialize(3, {4}, 2, rng);
  ParameterVector p;
  for (std::size_t l = 0; l < e.layers(); ++l) {
    p.add("w" + std::to_string(l), e.weights[l]);
    p.add("b" + std::to_string(l), e.biases[l] + rng.normal_matrix(1, e.biases[l].cols()) * 0.3);
  }
  const Matrix y = rng.normal_matrix(5, 3);
  const Objective f = [&](ad::Tape& t, const BoundParameters& b) {
    ad::EncoderNodes nodes;
    nodes.weights = {b["w0"], b["w1"]};
    nodes.biases = {b["b0"], b["b1"]};
    const ad::EncodedLatent out = ad::encode(nodes, t.constant(y));
    return ad::add(ad::sum(ad::square(out.mean)), ad::sum(ad::log(out.scale)));
  };
  const GradientCheckReport r = check_gradient(f, p, gradient(f, p));
  CHECK(r.passed);
}
