#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "ldgd/autodiff.hpp"
#include "ldgd/optim.hpp"

using namespace ldgd;

TEST_CASE("parameter vector layout and transforms") {
  ParameterVector p;
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  p.add("a", a);
  p.add("pos", Matrix::Constant(1, 3, 2.0), Transform::log);
  p.add("soft", Matrix::Constant(1, 2, 0.5), Transform::softplus);
  CHECK(p.size() == 9);
  CHECK(p.block("pos").offset == 4);
  // column-major storage
  CHECK(p.storage()(1) == 3.0);
  CHECK(p.raw("pos")(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(testing::max_abs(p.value("soft").array() - 0.5) < 1e-14);
  CHECK(p.block_at(5).name == "pos");
  CHECK_THROWS(p.add("a", a));
  CHECK(apply_transform(Transform::softplus, inverse_transform(Transform::softplus, Matrix::Constant(1, 1, 40.0)))(0, 0) ==
        doctest::Approx(40.0).epsilon(1e-14));
  CHECK(apply_transform(Transform::softplus, inverse_transform(Transform::softplus, Matrix::Constant(1, 1, 1e-8)))(0, 0) ==
        doctest::Approx(1e-8).epsilon(1e-8));
}

TEST_CASE("gradient examples") {
  ParameterVector p;
  Matrix theta(1, 2);
  theta << 1, 2;
  p.add("theta", theta);
  const Objective quad = [](ad::Tape&, const BoundParameters& b) { return ad::sum(ad::square(b["theta"])); };
  const Vector g = gradient(quad, p);
  CHECK(g(0) == doctest::Approx(2.0));
  CHECK(g(1) == doctest::Approx(4.0));

  ParameterVector q;
  q.add_raw("s", Matrix::Zero(1, 1), Transform::log);
  const Objective val = [](ad::Tape&, const BoundParameters& b) { return ad::sum(b["s"]); };
  CHECK(gradient(val, q)(0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gradient check flags a wrong gradient and names non-finite blocks") {
  ParameterVector p;
  p.add("x", Matrix::Constant(1, 3, 0.7));
  p.add("y", Matrix::Constant(2, 1, 1.5), Transform::log);
  const Objective f = [](ad::Tape&, const BoundParameters& b) {
    return ad::add(ad::sum(ad::tanh(b["x"])), ad::sum(ad::log(b["y"])));
  };
  const Vector g = gradient(f, p);
  const GradientCheckReport ok = check_gradient(f, p, g);
  CHECK(ok.passed);
  Vector bad = g;
  bad(4) *= 1.5;
  const GradientCheckReport r = check_gradient(f, p, bad);
  CHECK_FALSE(r.passed);
  CHECK_FALSE(r.block("y").passed);
  CHECK(r.block("x").passed);

  ParameterVector edge;
  edge.add("z", Matrix::Constant(1, 1, 0.0));
  const Objective sqrt_like = [](ad::Tape&, const BoundParameters& b) { return ad::sum(ad::log(b["z"])); };
  try {
    (void)gradient(sqrt_like, edge);
    FAIL("expected NumericalFailure");
  } catch (const NumericalFailure&) {
  }
}

TEST_CASE("adam examples") {
  SUBCASE("zero gradient leaves parameters") {
    AdamState s(3, {});
    Vector p = Vector::LinSpaced(3, -1, 1);
    const Vector before = p;
    s.step(p, Vector::Zero(3));
    CHECK(p == before);
  }
  SUBCASE("first step moves by the learning rate") {
    AdamState s(1, AdamConfig{0.1});
    Vector p = Vector::Zero(1);
    s.step(p, Vector::Ones(1));
    CHECK(p(0) == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(s.steps() == 1);
  }
  SUBCASE("converges on a quadratic") {
    AdamState s(1, AdamConfig{0.05});
    Vector p = Vector::Zero(1);
    for (int i = 0; i < 500; ++i) s.step(p, Vector::Constant(1, 2.0 * (p(0) - 3.0)));
    CHECK(std::abs(p(0) - 3.0) < 1e-2);
  }
  SUBCASE("translation consistent") {
    AdamState s1(2, AdamConfig{0.05}), s2(2, AdamConfig{0.05});
    Vector p1(2), p2(2);
    p1 << 0.5, -2.0;
    const Vector c = Vector::Constant(2, 4.25);
    p2 = p1 + c;
    const Vector target(Vector::LinSpaced(2, 1.0, 2.0));
    for (int i = 0; i < 3000; ++i) {
      s1.step(p1, 2.0 * (p1 - target));
      s2.step(p2, 2.0 * (p2 - c - target));
    }
    CHECK(testing::max_abs(p2 - p1 - c) < 1e-6);
  }
  SUBCASE("non-finite gradient is rejected") {
    AdamState s(1, {});
    Vector p = Vector::Zero(1);
    CHECK_THROWS_AS(s.step(p, Vector::Constant(1, std::nan(""))), NumericalFailure);
    CHECK_THROWS_AS(s.step(p, Vector::Zero(2)), InvalidArgument);
  }
}

TEST_CASE("matrix primitives pass the finite-difference contract") {
  RandomSource rng(31);
  ParameterVector p;
  const Matrix b = rng.normal_matrix(3, 3);
  p.add("spd", b * b.transpose() + Matrix::Identity(3, 3));
  p.add("rhs", rng.normal_matrix(3, 2));
  p.add("w", rng.normal_matrix(3, 3));
  p.add("alpha", (rng.normal_matrix(1, 2).array().abs() + 0.5).matrix(), Transform::log);
  p.add("var", Matrix::Constant(1, 1, 1.3), Transform::log);
  p.add("z", rng.normal_matrix(3, 2));
  p.add("x", rng.normal_matrix(4, 2));
  const Objective f = [](ad::Tape&, const BoundParameters& bp) {
    const ad::Var sym = ad::scale(ad::add(bp["spd"], ad::transpose(bp["spd"])), 0.5);
    const ad::Var l = ad::cholesky(sym, 0.0);
    const ad::Var solved = ad::tri_solve(l, bp["rhs"]);
    const ad::Var k = ad::ard_gram(bp["x"], bp["z"], bp["var"], bp["alpha"]);
    const ad::Var w = ad::block_tril_expdiag(bp["w"], 3);
    const ad::Var quad = ad::quad_form_cols(ad::transpose(k), w);
    return ad::add(ad::add(ad::sum(ad::square(solved)), ad::sum(ad::softplus(quad))),
                   ad::sum(ad::matmul(k, ad::tanh(solved))));
  };
  const GradientCheckReport r = check_gradient(f, p, gradient(f, p));
  for (const auto& blk : r.blocks) {
    CAPTURE(blk.name);
    CHECK(blk.passed);
  }
}

TEST_CASE("triangular block ops agree with the expanded factors") {
  RandomSource rng(37);
  ParameterVector p;
  p.add("raw", 0.5 * rng.normal_matrix(3, 6));
  p.add("wt", (rng.normal_matrix(1, 2).array().abs() + 0.2).matrix(), Transform::log);
  p.add("a", rng.normal_matrix(3, 4));

  ad::Tape tape;
  const BoundParameters bp(tape, p);
  const ad::Var raw = bp.raw("raw");
  const Matrix w = ad::block_tril_expdiag(raw, 3).value();
  Matrix expected = Matrix::Zero(3, 3);
  double frob = 0.0;
  for (Index k = 0; k < 2; ++k) {
    const Matrix wk = w.middleCols(k * 3, 3);
    expected += p.value("wt")(0, k) * wk * wk.transpose();
    frob += wk.squaredNorm() - 2.0 * wk.diagonal().array().log().sum();
  }
  CHECK(testing::max_abs(ad::weighted_tril_gram(raw, bp["wt"]).value() - expected) < 1e-12);
  CHECK(ad::tril_frobenius_logdet(raw).scalar() == doctest::Approx(frob).epsilon(1e-12));

  const Objective f = [](ad::Tape&, const BoundParameters& b) {
    const ad::Var s = ad::weighted_tril_gram(b.raw("raw"), b["wt"]);
    return ad::add(ad::sum(ad::hadamard(b["a"], ad::matmul(s, b["a"]))), ad::tril_frobenius_logdet(b.raw("raw")));
  };
  const GradientCheckReport r = check_gradient(f, p, gradient(f, p));
  for (const auto& blk : r.blocks) {
    CAPTURE(blk.name);
    CHECK(blk.passed);
  }
}
