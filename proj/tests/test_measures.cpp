#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "alphadisc/errors.hpp"
#include "alphadisc/measures.hpp"

using namespace alphadisc;

namespace {

double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) s += p[i] * std::log(p[i] / q[i]);
    s += q[i] - p[i];
  }
  return s;
}

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 2.0);
  std::vector<double> w(n);
  for (auto& x : w) x = u(rng);
  return w;
}

double normal_density(double x, double precision) {
  return std::sqrt(precision / (2.0 * std::numbers::pi)) * std::exp(-0.5 * precision * x * x);
}

}  // namespace

TEST_CASE("positive measure validation") {
  CHECK_THROWS_AS(PositiveMeasure({0.5, -0.1}), DomainError);
  CHECK_THROWS_AS(PositiveMeasure({0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(PositiveMeasure({1.0, 2.0}, {0, 0}), DomainError);
  const PositiveMeasure p({1.0, 3.0});
  CHECK(p.total() == doctest::Approx(4.0));
  CHECK(p.scaled(0.5).total() == doctest::Approx(2.0));
}

TEST_CASE("alpha parameter tolerance bounds") {
  CHECK_THROWS_AS(AlphaParam(0.5, 0.0), DomainError);
  CHECK_THROWS_AS(AlphaParam(0.5, 0.02), DomainError);
  CHECK(AlphaParam(1.0 + 1e-7).is_kl());
  CHECK(AlphaParam(-1e-7).is_reverse_kl());
  CHECK_FALSE(AlphaParam(0.5).is_kl());
}

TEST_CASE("discrete divergence examples") {
  const PositiveMeasure half({0.5, 0.5});
  CHECK(alpha_divergence_discrete(half, half, AlphaParam(0.5)) == 0.0);
  CHECK(alpha_divergence_discrete(PositiveMeasure({1.0, 0.0}), half, AlphaParam(1.0)) ==
        doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(alpha_divergence_discrete(PositiveMeasure({0.75, 0.25}), half, AlphaParam(1.0)) ==
        doctest::Approx(0.130812).epsilon(1e-5));

  // The general formula near alpha = 1 agrees with the KL limit.
  const PositiveMeasure p({1.0, 0.0});
  const double near = alpha_divergence_discrete(p, half, AlphaParam(1.0 - 1e-5));
  CHECK(std::abs(near - std::log(2.0)) < 1e-4);
}

TEST_CASE("zero weights follow the limit conventions") {
  const PositiveMeasure p({1.0, 1.0});
  const PositiveMeasure q({1.0, 0.0});
  CHECK(std::isinf(alpha_divergence_discrete(p, q, AlphaParam(1.0))));
  CHECK(std::isinf(alpha_divergence_discrete(p, q, AlphaParam(1.5))));
  CHECK(std::isfinite(alpha_divergence_discrete(p, q, AlphaParam(0.5))));
  CHECK(std::isinf(alpha_divergence_discrete(q, p, AlphaParam(0.0))));
  CHECK(alpha_divergence_discrete(q, p, AlphaParam(1.0)) == doctest::Approx(1.0));
}

TEST_CASE("mismatched supports are rejected") {
  const PositiveMeasure a({1.0, 2.0}, {0, 1});
  const PositiveMeasure b({1.0, 2.0}, {0, 2});
  CHECK_THROWS_AS(alpha_divergence_discrete(a, b, AlphaParam(0.5)), SupportMismatchError);
  CHECK_THROWS_AS(alpha_divergence_discrete(a, PositiveMeasure({1.0}), AlphaParam(0.5)), SupportMismatchError);
}

TEST_CASE("nonnegativity, identity and limit continuity on random measures") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pw = random_weights(rng, 6);
    const auto qw = random_weights(rng, 6);
    const PositiveMeasure p(pw);
    const PositiveMeasure q(qw);
    for (double a = -2.0; a <= 3.0 + 1e-12; a += 0.25) {
      CHECK(alpha_divergence_discrete(p, q, AlphaParam(a)) >= -1e-12);
      CHECK(std::abs(alpha_divergence_discrete(p, p, AlphaParam(a))) < 1e-12);
    }
    const double forward = kl(pw, qw);
    const double reverse = kl(qw, pw);
    for (double eps : {1e-5, -1e-5}) {
      CHECK(std::abs(alpha_divergence_discrete(p, q, AlphaParam(1.0 + eps)) - forward) <= 1e-4 * (1 + forward));
      CHECK(std::abs(alpha_divergence_discrete(p, q, AlphaParam(eps)) - reverse) <= 1e-4 * (1 + reverse));
    }
    CHECK(alpha_divergence_discrete(p, q, AlphaParam(0.5)) > 0.0);
  }
}

TEST_CASE("quadrature examples") {
  const Grid grid = Grid::uniform(1, GridAxis{-8.0, 8.0, 4001});
  const Density std_normal = [](const Vector& y) { return normal_density(y[0], 1.0); };
  const Density precision2 = [](const Vector& y) { return normal_density(y[0], 2.0); };

  const auto same = alpha_divergence_quadrature(std_normal, std_normal, grid, AlphaParam(0.5));
  CHECK(std::abs(same.value) < 1e-8);
  CHECK_FALSE(same.normalization_warning);

  // p has precision 2, q is the standard normal.
  const double d1 = alpha_divergence_quadrature(precision2, std_normal, grid, AlphaParam(1.0)).value;
  CHECK(d1 == doctest::Approx(0.5 * std::log(2.0) + 0.25 - 0.5).epsilon(1e-9));
  CHECK(std::abs(d1 - 0.096574) < 1e-6);
  const double dh = alpha_divergence_quadrature(precision2, std_normal, grid, AlphaParam(0.5)).value;
  CHECK(dh == doctest::Approx(4.0 * (1.0 - std::pow(2.0, 0.25) / std::sqrt(1.5))).epsilon(1e-9));

  const Grid narrow = Grid::uniform(1, GridAxis{-1.0, 1.0, 401});
  CHECK(alpha_divergence_quadrature(std_normal, std_normal, narrow, AlphaParam(0.5)).normalization_warning);
}

TEST_CASE("quadrature is invariant under a monotone change of variable") {
  // x = sinh(z): densities in z pick up the Jacobian cosh(z).
  const auto p = [](double x) { return normal_density(x - 0.3, 1.5); };
  const auto q = [](double x) { return normal_density(x, 1.0); };
  const Grid gx = Grid::uniform(1, GridAxis{-12.0, 12.0, 8001});
  const Grid gz = Grid::uniform(1, GridAxis{-4.0, 4.0, 8001});
  for (double a : {0.0, 0.5, 1.0}) {
    const double direct = alpha_divergence_quadrature([&](const Vector& v) { return p(v[0]); },
                                                      [&](const Vector& v) { return q(v[0]); }, gx,
                                                      AlphaParam(a)).value;
    const double changed =
        alpha_divergence_quadrature([&](const Vector& v) { return p(std::sinh(v[0])) * std::cosh(v[0]); },
                                    [&](const Vector& v) { return q(std::sinh(v[0])) * std::cosh(v[0]); }, gz,
                                    AlphaParam(a)).value;
    CHECK(std::abs(direct - changed) < 1e-6);
  }
}

TEST_CASE("two-dimensional tensor grid") {
  const Grid grid = Grid::uniform(2, GridAxis{-8.0, 8.0, 401});
  const Density p = [](const Vector& y) { return normal_density(y[0], 2.0) * normal_density(y[1], 1.0); };
  const Density q = [](const Vector& y) { return normal_density(y[0], 1.0) * normal_density(y[1], 1.0); };
  CHECK(alpha_divergence_quadrature(p, q, grid, AlphaParam(1.0)).value ==
        doctest::Approx(0.096574).epsilon(1e-5));
}

TEST_CASE("optimal gamma examples") {
  CHECK(optimal_gamma(PositiveMeasure({0.6, 0.4}), PositiveMeasure({1.0, 1.0}), AlphaParam(1.0)) ==
        doctest::Approx(0.5));
  const PositiveMeasure normalized({0.2, 0.3, 0.5});
  for (double a : {0.25, 0.5, 1.0, 1.5, -0.5}) {
    CHECK(optimal_gamma(normalized, normalized, AlphaParam(a)) == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(optimal_gamma(normalized, normalized, AlphaParam(0.0)), UnsupportedLimitError);
}

TEST_CASE("optimal gamma is the argmin over a log grid") {
  const PositiveMeasure p({0.75, 0.25});
  const PositiveMeasure s({2.0, 2.0});
  const AlphaParam a(0.5);
  const double g = optimal_gamma(p, s, a);
  const double best = alpha_divergence_discrete(p, s.scaled(g), a);
  for (int k = 0; k < 10000; ++k) {
    const double gamma = std::pow(10.0, -3.0 + 6.0 * k / 9999.0);
    CHECK(best <= alpha_divergence_discrete(p, s.scaled(gamma), a) + 1e-14);
  }
}

TEST_CASE("optimal gamma argmin and reduced form on random instances") {
  std::mt19937_64 rng(5);
  for (double a : {0.25, 0.5, 0.75, 1.0, 1.5}) {
    for (int trial = 0; trial < 4; ++trial) {
      const PositiveMeasure p(random_weights(rng, 5));
      const PositiveMeasure s(random_weights(rng, 5));
      const AlphaParam alpha(a);
      const double g = optimal_gamma(p, s, alpha);
      const double at_opt = alpha_divergence_discrete(p, s.scaled(g), alpha);
      CHECK(std::abs(reduced_divergence_after_normalization(p, s, alpha) - at_opt) < 1e-10);
      for (int k = 0; k < 10000; k += 7) {
        const double gamma = std::pow(10.0, -3.0 + 6.0 * k / 9999.0);
        CHECK(at_opt <= alpha_divergence_discrete(p, s.scaled(gamma), alpha) + 1e-12);
      }
    }
  }
}

TEST_CASE("reduced divergence examples") {
  const PositiveMeasure s({0.3, 0.7});
  CHECK(std::abs(reduced_divergence_after_normalization(s, s, AlphaParam(0.5))) < 1e-14);
  CHECK(reduced_divergence_after_normalization(PositiveMeasure({0.75, 0.25}), PositiveMeasure({1.0, 1.0}),
                                               AlphaParam(1.0)) == doctest::Approx(0.130812).epsilon(1e-5));
  const PositiveMeasure p({0.75, 0.25});
  const PositiveMeasure s3({3.0, 1.0});
  const AlphaParam half(0.5);
  CHECK(std::abs(reduced_divergence_after_normalization(p, s3, half) -
                 alpha_divergence_discrete(p, s3.scaled(optimal_gamma(p, s3, half)), half)) < 1e-12);
}

TEST_CASE("logdet divergence") {
  CHECK(std::abs(logdet_divergence(Matrix::Identity(3, 3), Matrix::Identity(3, 3))) < 1e-14);
  CHECK(logdet_divergence(2.0 * Matrix::Identity(1, 1), Matrix::Identity(1, 1)) ==
        doctest::Approx(0.306853).epsilon(1e-6));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  auto random_spd = [&] {
    Matrix g(4, 4);
    for (int i = 0; i < 16; ++i) g.data()[i] = n01(rng);
    return Matrix(g * g.transpose() + 0.5 * Matrix::Identity(4, 4));
  };
  const Matrix a = random_spd();
  const Matrix b = random_spd();
  // Eigenvalues of B^-1/2 A B^-1/2.
  const Eigen::SelfAdjointEigenSolver<Matrix> eb(b);
  const Matrix b_inv_half = eb.operatorInverseSqrt();
  const Eigen::SelfAdjointEigenSolver<Matrix> ec(b_inv_half * a * b_inv_half);
  double oracle = 0.0;
  for (double l : ec.eigenvalues()) oracle += l - std::log(l) - 1.0;
  CHECK(std::abs(logdet_divergence(a, b) - oracle) < 1e-10);

  Matrix indefinite = Matrix::Identity(2, 2);
  indefinite(1, 1) = -1.0;
  CHECK_THROWS_AS(logdet_divergence(indefinite, Matrix::Identity(2, 2)), DomainError);
}
