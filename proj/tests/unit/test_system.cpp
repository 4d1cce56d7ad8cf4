#include <doctest.h>

#include <cmath>
#include <random>

#include "example.hpp"
#include "impulsive/errors.hpp"
#include "impulsive/system.hpp"

using namespace impulsive;
using impulsive::test::example_system;
using impulsive::test::published_constants;

namespace {

// e^{At} for A = [[-6,2],[-8,1]] from its complex eigenvalues −5/2 ± iβ.
Matrix exp_example_A(double t) {
  const double alpha = -2.5, beta = std::sqrt(15.0) / 2;
  const Matrix A{{-6, 2}, {-8, 1}};
  return std::exp(alpha * t) *
         (Matrix::scalar(2, std::cos(beta * t)) + (A - Matrix::scalar(2, alpha)) * (std::sin(beta * t) / beta));
}

// Largest singular value of a 2x2 matrix.
double norm2x2(const Matrix& m) {
  const double f = norm_fro(m) * norm_fro(m);
  const double d = std::abs(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
  return std::sqrt(0.5 * (f + std::sqrt(std::max(0.0, f * f - 4 * d * d))));
}

}  // namespace

TEST_CASE("averaged matrix eigenvalues") {
  const auto ev = eigenvalues(averaged_matrix(example_system()));
  REQUIRE(ev.size() == 2);
  const double re = -2.5 - 2 / M_PI * std::log(3.0);
  for (const auto& z : ev) {
    CHECK(z.real() == doctest::Approx(re).epsilon(1e-12));
    CHECK(std::abs(z.imag()) == doctest::Approx(std::sqrt(15.0) / 2).epsilon(1e-12));
  }
}

TEST_CASE("hypothesis values with the published constants") {
  const auto rep = check_hypotheses(example_system(), published_constants());
  CHECK(rep.all_hold());
  const double a5 = 4.9625 * (0.2 / 2.5 + 2 * 0.05 / (1 - std::exp(-2.5 * M_PI)));
  const double a6 = 4.9625 * 0.2 + 2 / M_PI * std::log(1 + 4.9625 * 0.05);
  CHECK(rep.get("A5").lhs == doctest::Approx(a5).epsilon(1e-12));
  CHECK(rep.get("A5").lhs == doctest::Approx(0.8934).epsilon(0.001));
  CHECK(rep.get("A6").lhs == doctest::Approx(a6).epsilon(1e-12));
  CHECK(rep.get("A6").rhs == 2.5);
  CHECK(rep.get("A7").lhs == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("raising L_h breaks the inverse-jump contraction") {
  auto c = published_constants();
  c.L_h = 0.34;
  const auto rep = check_hypotheses(example_system(), c);
  CHECK_FALSE(rep.get("A7").holds);
  CHECK(rep.get("A7").lhs == doctest::Approx(1.02));
  CHECK(rep.get("A1").holds);
  CHECK(rep.get("A2").holds);
  CHECK(rep.get("A6").holds);
  // The contraction sum also grows past 1 at this L_h.
  CHECK_FALSE(rep.get("A5").holds);
}

TEST_CASE("non-commuting or singular jump data fail the first check") {
  const auto& base = example_system();
  const QuasilinearImpulsiveSystem bad(base.A(), Matrix{{-0.5, 0.1}, {0, -0.5}}, base.f(), base.h(),
                                       base.schedule(), base.perturbation_ptr());
  CHECK_FALSE(check_hypotheses(bad, published_constants()).get("A1").holds);
  const QuasilinearImpulsiveSystem singular(base.A(), Matrix::scalar(2, -1.0), base.f(), base.h(),
                                            base.schedule(), base.perturbation_ptr());
  CHECK_FALSE(check_hypotheses(singular, published_constants()).get("A1").holds);
}

TEST_CASE("system construction validates its inputs") {
  const auto& base = example_system();
  CHECK_THROWS_AS(QuasilinearImpulsiveSystem(base.A(), Matrix::zero(3), base.f(), base.h(),
                                             base.schedule(), base.perturbation_ptr()),
                  DomainError);
  CHECK_THROWS_AS(QuasilinearImpulsiveSystem(base.A(), base.B(), {parse("x1"), parse("x3")},
                                             base.h(), base.schedule(), base.perturbation_ptr()),
                  DomainError);
  CHECK_THROWS_AS(QuasilinearImpulsiveSystem(base.A(), base.B(), base.f(), {parse("t"), parse("x1")},
                                             base.schedule(), base.perturbation_ptr()),
                  DomainError);
  // sin(t) is not π-periodic.
  CHECK_THROWS_AS(QuasilinearImpulsiveSystem(base.A(), base.B(), {parse("sin(t)"), parse("0")},
                                             base.h(), base.schedule(), base.perturbation_ptr()),
                  DomainError);
}

TEST_CASE("matriciant agrees with the closed form") {
  const auto& sys = example_system();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-5, 15);
  for (int trial = 0; trial < 100; ++trial) {
    double s = u(rng), t = u(rng);
    if (t < s) std::swap(s, t);
    const auto n = sys.schedule().count_impulses(s, t, true);
    const Matrix expected = exp_example_A(t - s) * std::pow(1.0 / 3, static_cast<double>(n));
    CHECK(max_abs_diff(cauchy_matrix(sys, t, s), expected) < 1e-12);
  }
  CHECK(cauchy_matrix(sys, 2.0, 2.0) == Matrix::identity(2));
  // From an impulse moment the jump at the left end is excluded.
  const double th = sys.schedule().theta(3);
  CHECK(max_abs_diff(cauchy_matrix_after(sys, th + 1.0, th), exp_example_A(1.0)) < 1e-12);
  CHECK(max_abs_diff(cauchy_matrix(sys, th + 1.0, th), exp_example_A(1.0) * (1.0 / 3)) < 1e-12);
  CHECK_THROWS_AS(cauchy_matrix(sys, 1.0, 2.0), DomainError);
}

TEST_CASE("closed-form decay constant of the example") {
  const double r15 = std::sqrt(15.0);
  const Matrix P{{0, 1}, {r15 / 4, 7.0 / 4}};
  CHECK(norm2x2(P) * norm2x2(inverse(P)) == doctest::Approx(4.9625).epsilon(2e-4));
  CHECK(spectral_norm(P) * spectral_norm(inverse(P)) ==
        doctest::Approx(norm2x2(P) * norm2x2(inverse(P))).epsilon(1e-12));
}

TEST_CASE("decay fit") {
  const auto fit = fit_decay_bound(example_system(), 2.5, 20);
  CHECK(fit.N_fit >= 1.0);
  CHECK(fit.N_fit <= 4.9625 * 1.001);
  CHECK_THROWS_AS(fit_decay_bound(example_system(), 3.5, 20), NumericError);
  const double lam = default_lambda(example_system());
  CHECK(lam == doctest::Approx(0.8 * (2.5 + 2 / M_PI * std::log(3.0))));
}

TEST_CASE("sampled function constants against their oracles") {
  const auto fc = estimate_function_constants(example_system());
  const double mf = std::hypot(0.4, 0.2);
  const double mh = std::hypot(0.05 * M_PI / 2 + 0.4, 0.04);
  CHECK(fc.M_f.value == doctest::Approx(mf).epsilon(0.01));
  CHECK(fc.M_h.value == doctest::Approx(mh).epsilon(0.01));
  CHECK(fc.M_f.raw <= mf + 1e-12);
  CHECK(fc.M_h.raw <= mh + 1e-12);
  CHECK(fc.L_f.raw <= 0.2 + 1e-12);
  CHECK(fc.L_h.raw <= 0.05 + 1e-12);
  CHECK(fc.L_f.value == doctest::Approx(0.2).epsilon(0.02));
  CHECK(fc.L_h.value == doctest::Approx(0.05).epsilon(0.02));
}

TEST_CASE("serial and parallel sampling agree") {
  SamplingOptions opt;
  opt.points_per_axis = 61;
  opt.t_points = 8;
  const auto a = estimate_function_constants(example_system(), opt, kernels::Exec::Serial);
  const auto b = estimate_function_constants(example_system(), opt, kernels::Exec::Parallel);
  CHECK(a.M_f.raw == b.M_f.raw);
  CHECK(a.L_f.raw == b.L_f.raw);
  CHECK(a.M_h.raw == b.M_h.raw);
  CHECK(a.L_h.raw == b.L_h.raw);
}

TEST_CASE("zero nonlinearity floors its constants") {
  const auto& base = example_system();
  const QuasilinearImpulsiveSystem lin = base.linear_part();
  const auto fc = estimate_function_constants(lin);
  CHECK(fc.M_f.floored);
  CHECK(fc.M_f.value == Tolerances::kConstantFloor);
}

TEST_CASE("derived constants") {
  const auto& sys = example_system();
  const auto c = published_constants();
  const auto d = compute_derived_constants(c, sys, 0.5);
  const double lam = 2.5, N = 4.9625, Lf = 0.2, Lh = 0.05, w = M_PI;
  const int p = 2;
  const double gamma = lam - N * Lf - p / w * std::log(1 + N * Lh);
  CHECK(d.gamma == doctest::Approx(gamma).epsilon(1e-12));
  CHECK(d.gamma == doctest::Approx(1.3664).epsilon(0.001));
  const double grow = std::pow(1 + N * Lh, p);
  const double K1 = (2 * N * (c.M_f + c.M_sigma) / lam + 2 * p * N * c.M_h / (1 - std::exp(-lam * w))) * grow;
  const double K2 = N / lam + N * N * Lf * grow / (lam * gamma) +
                    N * N * p * Lh * grow * std::exp(gamma * w) / (lam * (1 - std::exp(-gamma * w)));
  CHECK(d.K1 == doctest::Approx(K1).epsilon(1e-12));
  CHECK(d.K2 == doctest::Approx(K2).epsilon(1e-12));
  CHECK(d.M_phi == doctest::Approx(23.877).epsilon(0.01 / 23.877));
  const double normA = norm2x2(sys.A());
  CHECK(d.R_0 == doctest::Approx(normA * d.M_phi + c.M_f + c.M_sigma).epsilon(1e-12));
  CHECK(d.theta_bar == doctest::Approx((M_PI - 2) / 2));

  const double H0 = w * 0.5 / ((2 + w * (normA + Lf) + p * (norm2x2(sys.B()) + Lh)) * std::sqrt(2.0));
  CHECK(*d.H_0 == doctest::Approx(H0).epsilon(1e-12));
  const double q = Lh * 3;
  const double eps0 = H0 / 2 * std::min({1.0, (1 - q) / (2 * 3.0), 1 / (2 * (1.0 / 3 + Lh))});
  CHECK(*d.epsilon_0 == doctest::Approx(eps0).epsilon(1e-12));
  CHECK(*d.r > 0);
  CHECK(*d.r <= d.theta_bar / 3);
}

TEST_CASE("delta0-dependent constants scale linearly") {
  const auto c = published_constants();
  const auto d1 = compute_derived_constants(c, example_system(), 0.3);
  const auto d2 = compute_derived_constants(c, example_system(), 0.6);
  CHECK(*d2.H_0 == 2 * *d1.H_0);
  CHECK(*d2.epsilon_0 == 2 * *d1.epsilon_0);
  const auto none = compute_derived_constants(c, example_system(), std::nullopt);
  CHECK_FALSE(none.H_0.has_value());
  CHECK_FALSE(none.r.has_value());
}

TEST_CASE("derived constants refuse a non-positive rate") {
  auto c = published_constants();
  c.L_f = 2.0;
  CHECK_THROWS_AS(compute_derived_constants(c, example_system(), 0.5), HypothesisError);
}

TEST_CASE("Gronwall bound special cases") {
  const auto a = [](double) { return 1.5; };
  const auto b = [](double) { return 0.7; };
  SUBCASE("classical") {
    for (double t : {0.0, 0.5, 2.0, 5.0})
      CHECK(gronwall_bound(0, t, a, b, {}) == doctest::Approx(1.5 * std::exp(0.7 * t)).epsilon(1e-9));
  }
  SUBCASE("one impulse multiplies by 1 + beta") {
    const GronwallImpulse imp[] = {{1.0, 0.4}};
    CHECK(gronwall_bound(0, 3, a, b, imp) == doctest::Approx(1.5 * 1.4 * std::exp(2.1)).epsilon(1e-9));
    // An impulse at or after t does not count.
    CHECK(gronwall_bound(0, 1.0, a, b, imp) == doctest::Approx(1.5 * std::exp(0.7)).epsilon(1e-9));
  }
}
