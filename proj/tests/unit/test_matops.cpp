#include <doctest.h>

#include <cmath>
#include <random>

#include "impulsive/errors.hpp"
#include "impulsive/matops.hpp"

using namespace impulsive;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = u(rng);
  return m;
}

// Taylor series summed until the terms vanish; only for small norms.
Matrix taylor_exp(const Matrix& m) {
  Matrix sum = Matrix::identity(m.dim()), term = Matrix::identity(m.dim());
  for (int k = 1; k < 60; ++k) {
    term = term * m * (1.0 / k);
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("exponential of a rotation generator is a rotation") {
  const double a = 0.7;
  const Matrix E = mat_exp(Matrix{{0, -a}, {a, 0}});
  CHECK(E(0, 0) == doctest::Approx(std::cos(a)).epsilon(1e-15));
  CHECK(E(1, 0) == doctest::Approx(std::sin(a)).epsilon(1e-15));
  CHECK(E(0, 1) == doctest::Approx(-std::sin(a)).epsilon(1e-15));
}

TEST_CASE("exponential agrees with the Taylor series on small matrices") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = random_matrix(rng, 1 + trial % 5, 0.5);
    CHECK(max_abs_diff(mat_exp(m), taylor_exp(m)) < 1e-13);
  }
}

TEST_CASE("exponential of large-norm matrices satisfies e^{2M} = (e^M)^2") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = random_matrix(rng, 3, 4.0);
    const Matrix e1 = mat_exp(m), e2 = mat_exp(m * 2.0);
    CHECK(max_abs_diff(e2, e1 * e1) <= 1e-11 * norm_inf(e2));
  }
}

TEST_CASE("principal logarithm inverts the exponential") {
  SUBCASE("scalar jump matrix") {
    const Matrix L = mat_log_principal(Matrix::scalar(2, 1.0 / 3));
    CHECK(L(0, 0) == doctest::Approx(-std::log(3.0)).epsilon(1e-15));
    CHECK(L(0, 1) == 0.0);
  }
  SUBCASE("random near-identity matrices") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
      const Matrix m = random_matrix(rng, 3, 0.4);
      CHECK(max_abs_diff(mat_exp(mat_log_principal(mat_exp(m))), mat_exp(m)) < 1e-11);
      CHECK(max_abs_diff(mat_log_principal(mat_exp(m)), m) < 1e-10);
    }
  }
  SUBCASE("defective input") {
    const Matrix J{{2, 1}, {0, 2}};
    const Matrix L = mat_log_principal(J);
    CHECK(L(0, 0) == doctest::Approx(std::log(2.0)));
    CHECK(L(0, 1) == doctest::Approx(0.5));
  }
  SUBCASE("negative real eigenvalue has no principal logarithm") {
    CHECK_THROWS_AS(mat_log_principal(Matrix::scalar(2, -1.0)), NumericError);
    CHECK_THROWS_AS(mat_log_principal(Matrix::zero(2)), NumericError);
  }
}

TEST_CASE("eigenvalues") {
  SUBCASE("2x2 closed form") {
    const auto ev = eigenvalues(Matrix{{-6, 2}, {-8, 1}});
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].real() == doctest::Approx(-2.5));
    CHECK(std::abs(ev[0].imag()) == doctest::Approx(std::sqrt(15.0) / 2));
  }
  SUBCASE("companion matrix of (x-1)(x-2)(x-3)(x-4)") {
    // x^4 - 10x^3 + 35x^2 - 50x + 24
    const Matrix C{{10, -35, 50, -24}, {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}};
    const auto ev = eigenvalues(C);
    REQUIRE(ev.size() == 4);
    for (int i = 0; i < 4; ++i) {
      CHECK(ev[i].real() == doctest::Approx(i + 1.0).epsilon(1e-9));
      CHECK(std::abs(ev[i].imag()) < 1e-9);
    }
  }
  SUBCASE("trace and determinant are preserved") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      const Matrix m = random_matrix(rng, 5, 2.0);
      Complex sum = 0, prod = 1;
      for (const auto& z : eigenvalues(m)) {
        sum += z;
        prod *= z;
      }
      CHECK(sum.real() == doctest::Approx(m.trace()).epsilon(1e-9));
      CHECK(std::abs(sum.imag()) < 1e-9);
      CHECK(prod.real() == doctest::Approx(determinant(m)).epsilon(1e-8));
    }
  }
  SUBCASE("eigenvector satisfies the eigen equation") {
    const Matrix m{{-6, 2}, {-8, 1}};
    for (const auto& z : eigenvalues(m)) {
      const auto v = eigenvector(m, z);
      for (std::size_t i = 0; i < 2; ++i) {
        const Complex mv = m(i, 0) * v[0] + m(i, 1) * v[1];
        CHECK(std::abs(mv - z * v[i]) < 1e-10);
      }
    }
  }
}

TEST_CASE("spectral norm matches the closed form for 2x2 matrices") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix m = random_matrix(rng, 2, 3.0);
    // Largest eigenvalue of MᵀM by the quadratic formula.
    const Matrix S = m.transpose() * m;
    const double tr = S.trace(), det = S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
    const double top = 0.5 * (tr + std::sqrt(std::max(0.0, tr * tr - 4 * det)));
    CHECK(spectral_norm(m) == doctest::Approx(std::sqrt(top)).epsilon(1e-12));
  }
  CHECK(spectral_norm(Matrix::zero(3)) == 0.0);
  CHECK(spectral_norm(Matrix::identity(4)) == doctest::Approx(1.0));
}

TEST_CASE("spectral norm lies between the Frobenius bounds") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = random_matrix(rng, 6, 1.0);
    const double s = spectral_norm(m), f = norm_fro(m);
    CHECK(s <= f * (1 + 1e-12));
    CHECK(s >= f / std::sqrt(6.0) * (1 - 1e-12));
    CHECK(s * s <= norm_1(m) * norm_inf(m) * (1 + 1e-12));
  }
}

TEST_CASE("inverse, determinant and integer powers") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix m = random_matrix(rng, 4, 1.0) + Matrix::scalar(4, 3.0);
    CHECK(max_abs_diff(m * inverse(m), Matrix::identity(4)) < 1e-12);
    CHECK(max_abs_diff(power(m, 3), m * m * m) < 1e-10 * norm_inf(power(m, 3)));
    CHECK(max_abs_diff(power(m, -2), inverse(m * m)) < 1e-12);
    CHECK(determinant(m * m) == doctest::Approx(determinant(m) * determinant(m)));
  }
  CHECK(power(Matrix{{1, 2}, {3, 4}}, 0) == Matrix::identity(2));
  CHECK_THROWS_AS(inverse(Matrix{{1, 2}, {2, 4}}), NumericError);
}

TEST_CASE("vector helpers") {
  const std::vector<double> a{3, 4}, b{0, 0};
  CHECK(norm2(a) == 5.0);
  CHECK(dist2(a, b) == 5.0);
}
