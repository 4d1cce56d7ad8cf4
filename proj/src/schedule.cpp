#include "impulsive/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "impulsive/errors.hpp"

namespace impulsive {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

ImpulseSchedule::ImpulseSchedule(double omega, std::vector<double> base)
    : omega_(omega), base_(std::move(base)) {
  if (!(omega_ > 0) || !std::isfinite(omega_))
    throw DomainError("schedule: omega must be positive and finite");
  if (base_.empty()) throw DomainError("schedule: p must be at least 1");
  for (std::size_t i = 0; i < base_.size(); ++i) {
    if (!std::isfinite(base_[i])) throw DomainError("schedule: non-finite base theta");
    if (i > 0 && !(base_[i] > base_[i - 1]))
      throw DomainError("schedule: base thetas must be strictly increasing");
  }
  if (!(base_.back() < base_.front() + omega_))
    throw DomainError("schedule: base thetas must fit inside one period");
}

double ImpulseSchedule::theta(std::int64_t k) const {
  const std::int64_t p = static_cast<std::int64_t>(base_.size());
  const std::int64_t q = floor_div(k, p);
  const std::int64_t r = k - q * p;
  return base_[static_cast<std::size_t>(r)] + omega_ * static_cast<double>(q);
}

double ImpulseSchedule::gap(std::int64_t k) const {
  const std::int64_t p = static_cast<std::int64_t>(base_.size());
  const std::int64_t r = k - floor_div(k, p) * p;
  if (r + 1 < p) return base_[r + 1] - base_[r];
  return base_.front() + omega_ - base_.back();
}

double ImpulseSchedule::theta_bar() const {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < p(); ++r) best = std::min(best, gap(r));
  return best;
}

std::int64_t ImpulseSchedule::first_index_after(double t, bool strict) const {
  if (!std::isfinite(t)) throw DomainError("schedule: non-finite time");
  const std::int64_t p = static_cast<std::int64_t>(base_.size());
  const double periods = std::floor((t - base_.front()) / omega_);
  if (std::abs(periods) > 1e15) throw DomainError("schedule: time out of range");
  std::int64_t k = static_cast<std::int64_t>(periods) * p;
  const auto after = [&](std::int64_t j) { return strict ? theta(j) > t : theta(j) >= t; };
  while (after(k)) k -= p;
  while (!after(k)) ++k;
  return k;
}

std::int64_t ImpulseSchedule::count_impulses(double a, double b, bool include_left) const {
  if (!(b > a)) return 0;
  const std::int64_t lo = first_index_after(a, !include_left);
  const std::int64_t hi = first_index_after(b, false);
  return hi > lo ? hi - lo : 0;
}

std::int64_t ImpulseSchedule::block_index(double t) const {
  if (!std::isfinite(t)) throw DomainError("schedule: non-finite time");
  const std::int64_t p = static_cast<std::int64_t>(base_.size());
  const double periods = std::floor((t - base_.front()) / omega_);
  if (std::abs(periods) > 1e15) throw DomainError("schedule: time out of range");
  std::int64_t k = static_cast<std::int64_t>(periods);
  while (theta(k * p) >= t) --k;
  while (theta((k + 1) * p) < t) ++k;
  return k;
}

}  // namespace impulsive
