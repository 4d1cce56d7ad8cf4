#pragma once

#include <cstdint>
#include <vector>

namespace impulsive {

/// Regular impulse moments θ_k with θ_{k+p} = θ_k + ω, k ∈ ℤ.
///
/// θ_k is always computed as base[k mod p] + ω·floor(k/p), never by
/// accumulation, so the periodicity relation holds to rounding for any k.
class ImpulseSchedule {
 public:
  ImpulseSchedule(double omega, std::vector<double> base);

  int p() const noexcept { return static_cast<int>(base_.size()); }
  double omega() const noexcept { return omega_; }
  const std::vector<double>& base() const noexcept { return base_; }

  double theta(std::int64_t k) const;

  /// Gap θ_{k+1} − θ_k computed from the base pattern (exactly periodic).
  double gap(std::int64_t k) const;

  /// min over one period of θ_{k+1} − θ_k.
  double theta_bar() const;

  /// Smallest k with θ_k > t (strict) or θ_k ≥ t (non-strict).
  std::int64_t first_index_after(double t, bool strict) const;

  /// Number of θ_k in (a, b), or in [a, b) when include_left. Zero for b ≤ a.
  std::int64_t count_impulses(double a, double b, bool include_left) const;

  /// The k with θ_{kp} < t ≤ θ_{(k+1)p}.
  std::int64_t block_index(double t) const;

 private:
  double omega_;
  std::vector<double> base_;
};

std::int64_t floor_div(std::int64_t a, std::int64_t b);

}  // namespace impulsive
