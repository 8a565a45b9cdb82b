#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "ldgd/numerics.hpp"

using namespace ldgd;

namespace {

double double_factorial(int n) {
  double r = 1.0;
  for (int i = n; i > 1; i -= 2) r *= i;
  return r;
}

double hermite_moment(int degree) {
  if (degree % 2 == 1) return 0.0;
  return double_factorial(degree - 1) * std::sqrt(M_PI) / std::pow(2.0, degree / 2);
}

}  // namespace

TEST_CASE("gauss_hermite small orders") {
  const QuadratureRule one = gauss_hermite(1);
  REQUIRE(one.order() == 1);
  CHECK(one.nodes[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(one.weights[0] == doctest::Approx(1.7724538509055159).epsilon(1e-12));

  const QuadratureRule two = gauss_hermite(2);
  CHECK(two.nodes[0] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(two.nodes[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(two.weights[0] == doctest::Approx(std::sqrt(M_PI) / 2).epsilon(1e-12));
  CHECK(two.weights[1] == doctest::Approx(std::sqrt(M_PI) / 2).epsilon(1e-12));

  CHECK_THROWS_AS(gauss_hermite(0), InvalidArgument);
  CHECK_THROWS_AS(gauss_hermite(101), InvalidArgument);
}

TEST_CASE("gauss_hermite integrates monomials exactly up to degree 2L-1") {
  double worst = 0.0;
  for (int order = 1; order <= 30; ++order) {
    const QuadratureRule r = gauss_hermite(order);
    for (int deg = 0; deg <= 2 * order - 1; ++deg) {
      double s = 0.0;
      for (int l = 0; l < order; ++l) s += r.weights[l] * std::pow(r.nodes[l], deg);
      const double exact = hermite_moment(deg);
      // odd moments vanish; measure them against the even moment of the same size
      const double scale = std::max(std::abs(exact), hermite_moment(deg + (deg % 2)));
      worst = std::max(worst, std::abs(s - exact) / scale);
    }
  }
  CHECK(worst < 1e-9);

  const QuadratureRule r20 = gauss_hermite(20);
  double s4 = 0.0, s2 = 0.0;
  for (int l = 0; l < 20; ++l) {
    s4 += r20.weights[l] * std::pow(r20.nodes[l], 4);
    s2 += r20.weights[l] * r20.nodes[l] * r20.nodes[l];
  }
  CHECK(std::abs(s4 - 3 * std::sqrt(M_PI) / 4) < 1e-10);
  CHECK(std::abs(s2 - std::sqrt(M_PI) / 2) < 1e-10);
}

TEST_CASE("gauss_hermite stays well formed at order 100") {
  const QuadratureRule r = gauss_hermite(100);
  double sum = 0.0;
  for (int l = 0; l < 100; ++l) {
    CHECK(r.weights[l] >= 0.0);
    if (l > 0) CHECK(r.nodes[l] > r.nodes[l - 1]);
    sum += r.weights[l];
  }
  CHECK(std::abs(sum - std::sqrt(M_PI)) < 1e-10);
}

TEST_CASE("cholesky_with_jitter") {
  SUBCASE("identity needs no jitter") {
    const CholeskyFactor f = cholesky_with_jitter(Matrix::Identity(3, 3), 1e-6);
    CHECK(f.jitter_used == 0.0);
    CHECK(testing::max_abs(f.lower - Matrix::Identity(3, 3)) == 0.0);
  }
  SUBCASE("near-singular 2x2 by hand") {
    Matrix a(2, 2);
    a << 4, 2, 2, 1.0000001;
    const CholeskyFactor f = cholesky_with_jitter(a, 1e-6);
    CHECK(f.jitter_used == 0.0);
    CHECK(f.lower(0, 0) == doctest::Approx(2.0));
    CHECK(f.lower(1, 0) == doctest::Approx(1.0));
    CHECK(f.lower(0, 1) == 0.0);
    CHECK(f.lower(1, 1) == doctest::Approx(std::sqrt(1e-7)).epsilon(1e-6));
  }
  SUBCASE("rank one forces jitter") {
    const Matrix a = Matrix::Ones(2, 2);
    const CholeskyFactor f = cholesky_with_jitter(a, 1e-6);
    CHECK(f.jitter_used > 0.0);
    const Matrix target = a + f.jitter_used * Matrix::Identity(2, 2);
    CHECK((f.lower * f.lower.transpose() - target).norm() / target.norm() < 1e-8);
    CHECK(f.lower.diagonal().minCoeff() > 0.0);
  }
  SUBCASE("random SPD factorizes without jitter") {
    RandomSource rng(11);
    for (int rep = 0; rep < 10; ++rep) {
      const Matrix b = rng.normal_matrix(6, 6);
      const Matrix a = b * b.transpose() + Matrix::Identity(6, 6);
      const CholeskyFactor f = cholesky_with_jitter(a, 1e-6);
      CHECK(f.jitter_used == 0.0);
      CHECK((f.lower * f.lower.transpose() - a).norm() / a.norm() < 1e-10);
    }
  }
  SUBCASE("indefinite matrix reports the minor") {
    Matrix a = Matrix::Identity(3, 3);
    a(2, 2) = -5.0;
    try {
      (void)cholesky_with_jitter(a, 1e-6);
      FAIL("expected NumericalFailure");
    } catch (const NumericalFailure& e) {
      CHECK(std::string(e.what()).find("leading minor 3") != std::string::npos);
    }
  }
}

TEST_CASE("log_normal_cdf against extended-precision values") {
  // 40-digit values of log Phi(x)
  const std::pair<double, double> table[] = {
      {-40.0, -804.6084420137537881666068}, {-20.0, -203.9171553710972639368045},
      {-10.0, -53.23128515051247057834703}, {-5.0, -15.0649983939887257360837},
      {-1.0, -1.841021645009263505770783},  {0.0, -0.6931471805599453094172321},
      {1.0, -0.1727537790234498895264832},  {5.0, -2.866516129637635933845963e-7},
      {10.0, -7.619853024160526070429306e-24}};
  for (const auto& [x, expected] : table) {
    const double got = log_normal_cdf(x);
    CAPTURE(x);
    if (x >= -8.0) {
      CHECK(std::abs(got - expected) < 1e-10);
    } else {
      CHECK(std::abs(got - expected) / std::abs(expected) < 1e-6);
    }
  }
  CHECK(log_normal_cdf(1.96) == doctest::Approx(std::log(0.9750021048517795)).epsilon(1e-9));
  CHECK(log_normal_cdf(1.96) == doctest::Approx(-0.0253156491642821148528487253713).epsilon(1e-10));
  CHECK(log_normal_cdf(-30.0) == doctest::Approx(-454.321243956343197107355771338).epsilon(1e-6));
  CHECK(std::isfinite(log_normal_cdf(-1e6)));
  CHECK(log_normal_cdf(40.0) <= 0.0);
}

TEST_CASE("log_normal_cdf is monotone and complementary") {
  double prev = log_normal_cdf(-60.0);
  for (double x = -59.9; x <= 10.0; x += 0.1) {
    const double v = log_normal_cdf(x);
    CHECK(v >= prev);
    prev = v;
  }
  for (double x = -8.0; x <= 8.0; x += 0.25) {
    CHECK(std::abs(std::exp(log_normal_cdf(x)) + std::exp(log_normal_cdf(-x)) - 1.0) < 1e-9);
  }
}

TEST_CASE("inverse_mills_ratio") {
  CHECK(inverse_mills_ratio(-30.0) == doctest::Approx(30.03325966743367703707112).epsilon(1e-10));
  CHECK(inverse_mills_ratio(-5.0) == doctest::Approx(5.186503967125842115616509).epsilon(1e-10));
  CHECK(inverse_mills_ratio(0.0) == doctest::Approx(0.7978845608028653558798921).epsilon(1e-12));
  CHECK(inverse_mills_ratio(3.0) == doctest::Approx(0.004437839042125663793302104).epsilon(1e-10));
}

TEST_CASE("random source") {
  RandomSource a(42), b(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.normal() == b.normal());

  RandomSource big(3);
  double sum = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) sum += big.normal();
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(static_cast<double>(n)));

  const RandomSource root(5);
  RandomSource s1 = root.substream("latent");
  RandomSource s2 = root.substream("inducing");
  int same = 0;
  for (int i = 0; i < 100; ++i) same += s1.normal() == s2.normal();
  CHECK(same == 0);

  // a substream does not depend on how much the parent was used
  RandomSource used(5);
  for (int i = 0; i < 10; ++i) used.normal();
  RandomSource s3 = used.substream("latent");
  RandomSource s4 = root.substream("latent");
  CHECK(s3.normal() == s4.normal());

  RandomSource p(9);
  std::vector<Index> perm = p.permutation(50);
  std::sort(perm.begin(), perm.end());
  for (Index i = 0; i < 50; ++i) CHECK(perm[static_cast<std::size_t>(i)] == i);
}
