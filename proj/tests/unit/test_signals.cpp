#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "impulsive/errors.hpp"
#include "impulsive/signals.hpp"

using namespace impulsive;

namespace {

VectorSequence example_sequence(std::size_t length = 2000) {
  const std::vector<Expression> maps{parse("4.5*s"), parse("(s+1)^3")};
  const auto history = logistic_history(3.95, 0.23, 32, 1);
  return lift_sequence(logistic_orbit(3.95, 0.23, length), maps, history);
}

// Alternating a, b with ‖a − b‖ = 1.
VectorSequence period_two(std::size_t length) {
  std::vector<double> flat;
  for (std::size_t k = 0; k < length; ++k) {
    flat.push_back(k % 2 == 0 ? 0.0 : 0.6);
    flat.push_back(k % 2 == 0 ? 0.0 : 0.8);
  }
  return VectorSequence(2, flat, 1.0);
}

double brute_score(const VectorSequence& seq, std::int64_t shift, std::int64_t a, std::int64_t b) {
  double out = 0;
  for (std::int64_t k = a; k < b; ++k) {
    const auto x = seq.at(k + shift), y = seq.at(k);
    out = std::max(out, std::hypot(x[0] - y[0], x[1] - y[1]));
  }
  return out;
}

}  // namespace

TEST_CASE("logistic orbit follows the recurrence exactly") {
  const auto orbit = logistic_orbit(3.95, 0.23, 1000);
  REQUIRE(orbit.values.size() == 1000);
  CHECK(orbit.values[0] == 0.23);
  for (std::size_t k = 0; k + 1 < orbit.values.size(); ++k) {
    const double z = orbit.values[k];
    CHECK(orbit.values[k + 1] == 3.95 * z * (1 - z));
    CHECK(orbit.values[k] >= 0.0);
    CHECK(orbit.values[k] <= 1.0);
  }
  CHECK_THROWS_AS(logistic_orbit(4.5, 0.2, 10), DomainError);
  CHECK_THROWS_AS(logistic_orbit(3.9, 1.2, 10), DomainError);
  CHECK_THROWS_AS(logistic_orbit(3.9, 0.2, 0), DomainError);
}

TEST_CASE("history consists of preimages ending in z0") {
  const auto h = logistic_history(3.95, 0.23, 32, 99);
  REQUIRE(h.size() == 32);
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double next = i + 1 < h.size() ? h[i + 1] : 0.23;
    CHECK(3.95 * h[i] * (1 - h[i]) == doctest::Approx(next).epsilon(1e-9));
  }
  CHECK(logistic_history(3.95, 0.23, 32, 99) == h);
}

TEST_CASE("lifted sequence values and bound") {
  const auto seq = example_sequence(100);
  CHECK(seq.first_index() == -32);
  CHECK(seq.end_index() == 100);
  const auto s0 = seq.at(0);
  CHECK(s0[0] == doctest::Approx(4.5 * 0.23));
  CHECK(s0[1] == doctest::Approx(1.860867));
  // sup over s ∈ [0,1] of ‖(4.5s, (s+1)^3)‖ is at s = 1.
  CHECK(seq.m_sigma() >= std::sqrt(84.25));
  CHECK(seq.m_sigma() <= std::sqrt(84.25) * 1.0011);
  for (std::int64_t k = seq.first_index(); k < seq.end_index(); ++k)
    CHECK(std::hypot(seq.at(k)[0], seq.at(k)[1]) <= seq.m_sigma());
  CHECK(seq.at(-1000)[0] == seq.at(-32)[0]);
  CHECK_THROWS_AS(seq.at(100), DomainError);
}

TEST_CASE("constant sequence reads its value everywhere") {
  const auto seq = VectorSequence::constant({1.0, 2.0}, 10);
  CHECK(seq.is_constant());
  CHECK(seq.at(-5)[1] == 2.0);
  CHECK(seq.at(1000000)[0] == 1.0);
  CHECK(convergence_score(seq, 3, 0, 5) == 0.0);
}

TEST_CASE("perturbation is piecewise constant on blocks open on the left") {
  const ImpulseSchedule sched(M_PI, {0.5, (M_PI - 1) / 2});
  const auto seq = example_sequence(100);
  const double start = sched.theta(4);  // block 2 starts here
  CHECK(perturbation_value(seq, sched, start)[0] == seq.at(1)[0]);
  CHECK(perturbation_value(seq, sched, start + 1e-9)[0] == seq.at(2)[0]);
  CHECK(perturbation_value(seq, sched, sched.theta(6))[0] == seq.at(2)[0]);
}

TEST_CASE("convergence score matches a direct maximum") {
  const auto seq = example_sequence(500);
  for (std::int64_t shift : {1, 7, 100}) CHECK(convergence_score(seq, shift, -10, 20) == brute_score(seq, shift, -10, 20));
  CHECK_THROWS_AS(convergence_score(seq, 600, 0, 10), DomainError);
}

TEST_CASE("period-two sequence") {
  const auto seq = period_two(200);
  const auto rep = find_witnesses(seq, 0, 10, 2, 0.5);
  // Even shifts score 0 but never separate, so only an odd shift survives.
  REQUIRE(rep.witnesses.size() == 1);
  CHECK(rep.witnesses[0].zeta == 1);
  CHECK(rep.witnesses[0].score == doctest::Approx(1.0));
  CHECK(rep.witnesses[0].eta == 1);
  CHECK(rep.delta0_est == doctest::Approx(1.0));
  CHECK(rep.warning);
}

TEST_CASE("constant sequence yields an empty report") {
  const auto rep = find_witnesses(VectorSequence::constant({1.0, 2.0}, 100), 0, 10, 5, 0.1);
  CHECK(rep.witnesses.empty());
  CHECK(rep.delta0_est == 0.0);
  CHECK(rep.warning);
}

TEST_CASE("witness search postconditions hold against a brute-force pass") {
  const auto seq = example_sequence(3000);
  const std::int64_t start = 0, len = 200;
  const double floor = 0.5;
  const auto rep = find_witnesses(seq, start, len, 5, floor);
  REQUIRE(rep.witnesses.size() == 5);

  // Brute-force scores over the same shift range.
  const std::int64_t max_shift = seq.end_index() - start - len - 1;
  std::vector<double> scores;
  for (std::int64_t z = 1; z <= max_shift; ++z) scores.push_back(brute_score(seq, z, start, start + len));
  std::set<double> distinct(scores.begin(), scores.end());
  std::vector<double> smallest(distinct.begin(), distinct.end());
  smallest.resize(5);

  for (std::size_t i = 0; i < rep.witnesses.size(); ++i) {
    const auto& w = rep.witnesses[i];
    if (i > 0) CHECK(w.score < rep.witnesses[i - 1].score);
    CHECK(w.score == doctest::Approx(scores[static_cast<std::size_t>(w.zeta - 1)]).epsilon(1e-14));
    CHECK(std::any_of(smallest.begin(), smallest.end(),
                      [&](double s) { return std::abs(s - w.score) <= 1e-14 * s; }));
    CHECK(w.separation >= floor);
    CHECK(w.separation >= rep.delta0_est);
    for (std::int64_t eta = 1; eta < w.eta; ++eta)
      CHECK(dist2(seq.at(w.zeta + eta), seq.at(eta)) < floor);
    CHECK(dist2(seq.at(w.zeta + w.eta), seq.at(w.eta)) == w.separation);
  }
}

TEST_CASE("serial and parallel witness searches agree") {
  const auto seq = example_sequence(5000);
  const auto a = find_witnesses(seq, -11, 15, 5, 0.5, false);
  const auto b = find_witnesses(seq, -11, 15, 5, 0.5, true);
  REQUIRE(a.witnesses.size() == b.witnesses.size());
  for (std::size_t i = 0; i < a.witnesses.size(); ++i) {
    CHECK(a.witnesses[i].zeta == b.witnesses[i].zeta);
    CHECK(a.witnesses[i].score == b.witnesses[i].score);
    CHECK(a.witnesses[i].eta == b.witnesses[i].eta);
  }
}

TEST_CASE("witness search rejects bad arguments") {
  const auto seq = example_sequence(100);
  CHECK_THROWS_AS(find_witnesses(seq, 0, 0, 5, 0.5), DomainError);
  CHECK_THROWS_AS(find_witnesses(seq, 0, 10, 0, 0.5), DomainError);
  CHECK_THROWS_AS(find_witnesses(seq, 0, 10, 5, 0.0), DomainError);
  CHECK_THROWS_AS(find_witnesses(seq, 0, 100, 5, 0.5), DomainError);
}
