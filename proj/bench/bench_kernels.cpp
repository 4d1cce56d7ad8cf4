// Serial reference vs OpenMP path for each grid kernel. The second benchmark
// argument selects the path: 0 serial, 1 parallel.

#include <cmath>

#include <benchmark/benchmark.h>

#include "impulsive/kernels.hpp"
#include "impulsive/signals.hpp"

using namespace impulsive;
using kernels::Exec;

namespace {

Exec exec_of(const benchmark::State& state) {
  return state.range(1) == 0 ? Exec::Serial : Exec::Parallel;
}

void BM_ShiftScores(benchmark::State& state) {
  const std::vector<Expression> maps{parse("4.5*s"), parse("(s+1)^3")};
  const auto seq = lift_sequence(logistic_orbit(3.95, 0.23, 120000), maps);
  const auto max_shift = state.range(0);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::shift_scores(seq, 0, 32, max_shift, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * max_shift);
}

void BM_DecayProfile(benchmark::State& state) {
  const Matrix A{{-6, 2}, {-8, 1}};
  kernels::DecayGrid grid;
  const int taus = 2001;
  for (int j = 0; j < taus; ++j) {
    const double tau = 0.01 * j;
    grid.exp_tau.push_back(mat_exp(A * tau));
    grid.weight.push_back(std::exp(2.5 * tau));
  }
  for (int i = 0; i <= 16; ++i) grid.jump_powers.push_back(power(Matrix::scalar(2, 1.0 / 3), i));
  grid.num_s = static_cast<std::size_t>(state.range(0));
  for (std::size_t s = 0; s < grid.num_s; ++s)
    for (int j = 0; j < taus; ++j) grid.counts.push_back(std::min(16, (j + static_cast<int>(s)) / 157));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::decay_profile(grid, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0) * taus);
}

void BM_SampleFunction(benchmark::State& state) {
  const std::vector<Expression> f{parse("0.1*cos(x2) + 0.3*sin(2*t)"), parse("0.2*tanh(x1)")};
  kernels::BoxGrid box;
  box.dim = 2;
  box.halfwidth = 10;
  box.points_per_axis = static_cast<std::size_t>(state.range(0));
  for (int i = 0; i < 16; ++i) box.t_values.push_back(M_PI * i / 16);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::sample_function(f, box, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0) * 16);
}

}  // namespace

BENCHMARK(BM_ShiftScores)->ArgsProduct({{10000, 100000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DecayProfile)->ArgsProduct({{64, 256}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleFunction)->ArgsProduct({{101, 201}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
