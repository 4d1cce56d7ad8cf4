#include "impulsive/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "impulsive/errors.hpp"
#include "impulsive/signals.hpp"

namespace impulsive::kernels {

namespace {

double window_score(const VectorSequence& seq, std::int64_t shift, std::int64_t begin,
                    std::int64_t len) {
  double best = 0;
  for (std::int64_t k = begin; k < begin + len; ++k)
    best = std::max(best, dist2(seq.at(k + shift), seq.at(k)));
  return best;
}

double decay_cell(const DecayGrid& g, std::size_t a, std::size_t j) {
  const std::size_t nt = g.exp_tau.size();
  const int c = g.counts[a * nt + j];
  const Matrix& jp = g.jump_powers[static_cast<std::size_t>(c)];
  return spectral_norm(g.exp_tau[j] * jp) * g.weight[j];
}

void check_decay_grid(const DecayGrid& g) {
  if (g.weight.size() != g.exp_tau.size() || g.counts.size() != g.num_s * g.exp_tau.size())
    throw DomainError("decay grid: inconsistent sizes");
  for (int c : g.counts)
    if (c < 0 || static_cast<std::size_t>(c) >= g.jump_powers.size())
      throw DomainError("decay grid: impulse count without a precomputed power");
}

// Grid point `idx` in the box, written coordinate by coordinate (axis 0
// varies slowest).
void box_point(const BoxGrid& box, std::size_t idx, double* x) {
  const double h = 2 * box.halfwidth / static_cast<double>(box.points_per_axis - 1);
  for (std::size_t d = box.dim; d-- > 0;) {
    const std::size_t i = idx % box.points_per_axis;
    idx /= box.points_per_axis;
    x[d] = -box.halfwidth + h * static_cast<double>(i);
  }
}

void eval_components(std::span<const Expression> comps, const Env& env, double* out) {
  for (std::size_t i = 0; i < comps.size(); ++i) out[i] = comps[i].eval(env);
}

}  // namespace

std::vector<double> shift_scores(const VectorSequence& seq, std::int64_t window_start,
                                 std::int64_t window_len, std::int64_t max_shift, Exec exec) {
  if (max_shift < 1) return {};
  if (!seq.stored(window_start) || !seq.stored(window_start + window_len - 1 + max_shift))
    throw DomainError("shift scores: shifted window outside the stored range");
  std::vector<double> out(static_cast<std::size_t>(max_shift));
  if (exec == Exec::Serial) {
    for (std::int64_t z = 1; z <= max_shift; ++z)
      out[static_cast<std::size_t>(z - 1)] = window_score(seq, z, window_start, window_len);
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t z = 1; z <= max_shift; ++z)
      out[static_cast<std::size_t>(z - 1)] = window_score(seq, z, window_start, window_len);
  }
  return out;
}

std::vector<double> decay_profile(const DecayGrid& grid, Exec exec) {
  check_decay_grid(grid);
  const std::size_t nt = grid.exp_tau.size();
  std::vector<double> profile(nt, 0.0);
  if (exec == Exec::Serial) {
    for (std::size_t j = 0; j < nt; ++j)
      for (std::size_t a = 0; a < grid.num_s; ++a)
        profile[j] = std::max(profile[j], decay_cell(grid, a, j));
  } else {
#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t j = 0; j < nt; ++j) {
      double best = 0;
      for (std::size_t a = 0; a < grid.num_s; ++a) best = std::max(best, decay_cell(grid, a, j));
      profile[j] = best;
    }
  }
  return profile;
}

FunctionSample sample_function(std::span<const Expression> components, const BoxGrid& box,
                               Exec exec) {
  if (box.dim == 0 || components.empty()) throw DomainError("sampling: empty function");
  if (box.dim > Tolerances::kMaxDim) throw DomainError("sampling: dimension too large");
  if (box.points_per_axis < 2 || !(box.halfwidth > 0))
    throw DomainError("sampling: box needs a positive half-width and at least 2 points per axis");
  const std::size_t m = components.size();
  const std::size_t n = box.points_per_axis;
  std::size_t total = 1;
  for (std::size_t d = 0; d < box.dim; ++d) total *= n;
  const double h = 2 * box.halfwidth / static_cast<double>(n - 1);

  std::vector<double> values(total * m);
  std::vector<double> t_list = box.t_values;
  const bool uses_t = !t_list.empty();
  if (!uses_t) t_list.push_back(0.0);

  FunctionSample result;
  for (double t : t_list) {
    auto fill = [&](std::size_t idx) {
      std::array<double, Tolerances::kMaxDim> x;
      box_point(box, idx, x.data());
      Env env;
      if (uses_t) env.t = t;
      env.x = std::span<const double>(x.data(), box.dim);
      eval_components(components, env, values.data() + idx * m);
    };
    // `stride` is the linear-index step for a unit move along axis d.
    auto quotient = [&](std::size_t idx) {
      double sup = norm2(std::span<const double>(values).subspan(idx * m, m));
      double lip = 0;
      std::size_t stride = 1;
      for (std::size_t d = box.dim; d-- > 0;) {
        const std::size_t coord = (idx / stride) % n;
        if (coord + 1 < n) {
          const double diff = dist2(std::span<const double>(values).subspan(idx * m, m),
                                    std::span<const double>(values).subspan((idx + stride) * m, m));
          lip = std::max(lip, diff / h);
        }
        stride *= n;
      }
      return std::pair{sup, lip};
    };

    double sup = 0, lip = 0;
    if (exec == Exec::Serial) {
      for (std::size_t idx = 0; idx < total; ++idx) fill(idx);
      for (std::size_t idx = 0; idx < total; ++idx) {
        const auto [s, l] = quotient(idx);
        sup = std::max(sup, s);
        lip = std::max(lip, l);
      }
    } else {
      // Exceptions cannot cross an OpenMP region; capture the first one.
      bool failed = false;
      std::string message;
#pragma omp parallel for schedule(static)
      for (std::size_t idx = 0; idx < total; ++idx) {
        try {
          fill(idx);
        } catch (const std::exception& e) {
#pragma omp critical
          if (!failed) {
            failed = true;
            message = e.what();
          }
        }
      }
      if (failed) throw EvalError(message);
#pragma omp parallel for schedule(static) reduction(max : sup, lip)
      for (std::size_t idx = 0; idx < total; ++idx) {
        const auto [s, l] = quotient(idx);
        sup = std::max(sup, s);
        lip = std::max(lip, l);
      }
    }
    result.sup_norm = std::max(result.sup_norm, sup);
    result.lipschitz = std::max(result.lipschitz, lip);
  }
  return result;
}

}  // namespace impulsive::kernels
