#pragma once

// Data-parallel grid kernels. Each has a serial reference path and an
// OpenMP path; both reduce with max only, so their results are identical.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "impulsive/expr.hpp"
#include "impulsive/matops.hpp"

namespace impulsive {

class VectorSequence;

namespace kernels {

enum class Exec { Serial, Parallel };

/// scores[ζ−1] = max over k ∈ [window_start, window_start+window_len) of
/// ‖σ_{k+ζ} − σ_k‖ for ζ = 1..max_shift.
std::vector<double> shift_scores(const VectorSequence& seq, std::int64_t window_start,
                                 std::int64_t window_len, std::int64_t max_shift, Exec exec);

/// Inputs for the decay-bound grid: exp_tau[j] = e^{A·τ_j}, weight[j] =
/// e^{λ·τ_j}, jump_powers[i] = (I+B)^i, counts[a·|τ| + j] = number of
/// impulses in [s_a, s_a + τ_j).
struct DecayGrid {
  std::vector<Matrix> exp_tau;
  std::vector<double> weight;
  std::vector<Matrix> jump_powers;
  std::vector<int> counts;
  std::size_t num_s = 0;
};

/// profile[j] = max over s of ‖e^{Aτ_j}(I+B)^{count}‖₂ · weight[j].
std::vector<double> decay_profile(const DecayGrid& grid, Exec exec);

/// Sup norm and axis-neighbour Lipschitz quotient of a vector function over
/// a uniform box grid (and optionally a t grid).
struct FunctionSample {
  double sup_norm = 0;
  double lipschitz = 0;
};

struct BoxGrid {
  std::size_t dim = 0;
  double halfwidth = 0;
  std::size_t points_per_axis = 0;
  std::vector<double> t_values;  ///< empty: the function does not depend on t
};

FunctionSample sample_function(std::span<const Expression> components, const BoxGrid& box,
                               Exec exec);

}  // namespace kernels
}  // namespace impulsive
