#pragma once

// Forcing sequences: logistic-map orbits, their vector lifts, the
// piecewise-constant perturbation g(t), and the search for shift/separation
// witnesses.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "impulsive/expr.hpp"
#include "impulsive/matops.hpp"
#include "impulsive/schedule.hpp"

namespace impulsive {

struct ScalarOrbit {
  double gamma = 0;
  double z0 = 0;
  std::vector<double> values;  ///< z_0 .. z_{L-1}
};

/// z_{k+1} = gamma·z_k·(1 − z_k). Requires gamma ∈ (0, 4], z0 ∈ [0, 1],
/// 1 ≤ length ≤ 1e8.
ScalarOrbit logistic_orbit(double gamma, double z0, std::size_t length);

/// `count` backward iterates w_{-count} .. w_{-1} ending in z0, so that
/// gamma·w_{-1}(1 − w_{-1}) = z0 and so on. Each step picks one of the two
/// preimages from a seeded generator; only preimages that themselves have
/// preimages are eligible.
std::vector<double> logistic_history(double gamma, double z0, std::size_t count,
                                     std::uint64_t seed);

/// Sequence σ_k of m-vectors stored for k ∈ [first_index, end_index).
/// Indices below first_index read as σ_{first_index}; a constant sequence
/// additionally reads every index past the end as its single value.
class VectorSequence {
 public:
  VectorSequence(std::size_t dim, std::vector<double> flat_values, double m_sigma,
                 std::int64_t first_index = 0);

  /// σ_k ≡ value for every k; `length` copies are stored for witness scans.
  static VectorSequence constant(const Vector& value, std::size_t length);

  std::size_t dim() const noexcept { return dim_; }
  std::int64_t first_index() const noexcept { return first_; }
  std::int64_t end_index() const noexcept { return first_ + static_cast<std::int64_t>(size()); }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
  double m_sigma() const noexcept { return m_sigma_; }
  bool is_constant() const noexcept { return constant_; }

  /// σ_k, with the backward extension applied. Throws DomainError past the end.
  std::span<const double> at(std::int64_t k) const;

  /// True when k lies in the stored range (no extension).
  bool stored(std::int64_t k) const noexcept { return k >= first_ && k < end_index(); }

  /// Short description of how indices outside the stored range are read.
  std::string extension_policy() const;

 private:
  std::size_t dim_;
  std::vector<double> values_;
  double m_sigma_;
  std::int64_t first_;
  bool constant_ = false;
};

/// σ_k = (maps_1(z_k), …, maps_m(z_k)) for the orbit values, preceded by
/// `history` (which then occupies indices −history.size() .. −1). M_σ is
/// the max of ‖map vector‖ over 1e5 points of s ∈ [0,1] times 1.001, and at
/// least the largest stored norm.
VectorSequence lift_sequence(const ScalarOrbit& orbit, std::span<const Expression> maps,
                             std::span<const double> history = {});

/// g(t) = σ_{block_index(t)}.
std::span<const double> perturbation_value(const VectorSequence& seq,
                                           const ImpulseSchedule& sched, double t);

/// max over k ∈ [window_begin, window_end) of ‖σ_{k+shift} − σ_k‖. Both the
/// window and its shift must lie in the stored range.
double convergence_score(const VectorSequence& seq, std::int64_t shift,
                         std::int64_t window_begin, std::int64_t window_end);

struct Witness {
  std::int64_t zeta = 0;
  double score = 0;
  std::int64_t eta = 0;
  double separation = 0;  ///< ‖σ_{ζ+η} − σ_η‖
};

struct WitnessReport {
  std::vector<Witness> witnesses;  ///< strictly decreasing score
  double delta0_est = 0;           ///< min separation; 0 when empty
  std::int64_t window_start = 0;
  std::int64_t window_len = 0;
  double delta0_floor = 0;
  bool warning = false;            ///< fewer than the requested number survived
  std::string message;
};

/// Scans shifts ζ ≥ 1 with the window [window_start, window_start+window_len)
/// shifted by ζ still stored; keeps the `num` smallest distinct scores
/// (ties broken by smaller shift) and pairs each with the smallest η ≥ 1
/// whose separation reaches delta0_floor. Shifts without such an η are
/// dropped.
WitnessReport find_witnesses(const VectorSequence& seq, std::int64_t window_start,
                             std::int64_t window_len, int num, double delta0_floor,
                             bool parallel = true);

}  // namespace impulsive
