#include "impulsive/signals.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "impulsive/errors.hpp"
#include "impulsive/kernels.hpp"

namespace impulsive {

ScalarOrbit logistic_orbit(double gamma, double z0, std::size_t length) {
  if (!(gamma > 0 && gamma <= 4)) throw DomainError("logistic map: gamma must lie in (0, 4]");
  if (!(z0 >= 0 && z0 <= 1)) throw DomainError("logistic map: z0 must lie in [0, 1]");
  if (length == 0 || length > 100'000'000)
    throw DomainError("logistic map: length must lie in [1, 1e8]");
  ScalarOrbit orbit{gamma, z0, {}};
  orbit.values.resize(length);
  double z = z0;
  for (std::size_t k = 0; k < length; ++k) {
    orbit.values[k] = z;
    z = gamma * z * (1 - z);
  }
  return orbit;
}

std::vector<double> logistic_history(double gamma, double z0, std::size_t count,
                                     std::uint64_t seed) {
  if (!(gamma > 0 && gamma <= 4)) throw DomainError("logistic map: gamma must lie in (0, 4]");
  if (!(z0 >= 0 && z0 <= 1)) throw DomainError("logistic map: z0 must lie in [0, 1]");
  const double top = gamma / 4;  // largest value with a preimage
  std::mt19937_64 rng(seed);
  std::vector<double> back(count);
  double z = z0;
  for (std::size_t i = 0; i < count; ++i) {
    if (z > top) throw DomainError("logistic map: value has no preimage");
    const double root = std::sqrt(std::max(0.0, 1 - z / top));
    const double hi = (1 + root) / 2;
    const double lo = (1 - root) / 2;
    const bool want_hi = (rng() & 1u) != 0;
    double w = (want_hi && hi <= top) ? hi : lo;
    if (w > top) w = hi <= top ? hi : lo;
    back[i] = w;
    z = w;
  }
  std::reverse(back.begin(), back.end());
  return back;
}

VectorSequence::VectorSequence(std::size_t dim, std::vector<double> flat_values, double m_sigma,
                               std::int64_t first_index)
    : dim_(dim), values_(std::move(flat_values)), m_sigma_(m_sigma), first_(first_index) {
  if (dim_ == 0) throw DomainError("sequence: dimension must be positive");
  if (values_.empty() || values_.size() % dim_ != 0)
    throw DomainError("sequence: value count is not a positive multiple of the dimension");
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("sequence: non-finite value");
  if (!(m_sigma_ >= 0) || !std::isfinite(m_sigma_)) throw DomainError("sequence: bad bound");
  for (std::size_t k = 0; k < size(); ++k) {
    const double n = norm2(std::span<const double>(values_).subspan(k * dim_, dim_));
    if (n > m_sigma_) throw DomainError("sequence: stored value exceeds M_sigma");
  }
}

VectorSequence VectorSequence::constant(const Vector& value, std::size_t length) {
  if (length == 0) throw DomainError("sequence: length must be positive");
  std::vector<double> flat;
  flat.reserve(value.size() * length);
  for (std::size_t k = 0; k < length; ++k) flat.insert(flat.end(), value.begin(), value.end());
  VectorSequence seq(value.size(), std::move(flat), norm2(value));
  seq.constant_ = true;
  return seq;
}

std::span<const double> VectorSequence::at(std::int64_t k) const {
  if (k >= end_index()) {
    if (!constant_)
      throw DomainError("sequence index " + std::to_string(k) + " beyond stored range (length " +
                        std::to_string(end_index()) + ")");
    k = first_;
  }
  if (k < first_) k = first_;
  return std::span<const double>(values_).subspan(static_cast<std::size_t>(k - first_) * dim_,
                                                  dim_);
}

std::string VectorSequence::extension_policy() const {
  if (constant_) return "constant sequence: every index reads the same value";
  return "indices below " + std::to_string(first_) + " read sigma_" + std::to_string(first_);
}

VectorSequence lift_sequence(const ScalarOrbit& orbit, std::span<const Expression> maps,
                             std::span<const double> history) {
  if (maps.empty()) throw DomainError("lift: at least one map is required");
  for (std::size_t i = 0; i < maps.size(); ++i)
    require_variables(maps[i], false, true, 0, "lift map " + std::to_string(i + 1));
  const std::size_t m = maps.size();
  auto lift = [&](double s, double* out) {
    Env env;
    env.s = s;
    for (std::size_t i = 0; i < m; ++i) out[i] = maps[i].eval(env);
  };

  double bound = 0;
  std::vector<double> tmp(m);
  constexpr int kGrid = 100000;
  for (int i = 0; i < kGrid; ++i) {
    lift(static_cast<double>(i) / (kGrid - 1), tmp.data());
    bound = std::max(bound, norm2(tmp));
  }
  bound *= Tolerances::kSequenceInflation;

  const std::size_t total = history.size() + orbit.values.size();
  std::vector<double> flat(total * m);
  for (std::size_t k = 0; k < total; ++k) {
    const double z = k < history.size() ? history[k] : orbit.values[k - history.size()];
    lift(z, flat.data() + k * m);
    bound = std::max(bound, norm2(std::span<const double>(flat).subspan(k * m, m)));
  }
  return VectorSequence(m, std::move(flat), bound, -static_cast<std::int64_t>(history.size()));
}

std::span<const double> perturbation_value(const VectorSequence& seq,
                                           const ImpulseSchedule& sched, double t) {
  return seq.at(sched.block_index(t));
}

double convergence_score(const VectorSequence& seq, std::int64_t shift,
                         std::int64_t window_begin, std::int64_t window_end) {
  if (window_end <= window_begin) return 0;
  if (!seq.stored(window_begin) || !seq.stored(window_end - 1) ||
      !seq.stored(window_begin + shift) || !seq.stored(window_end - 1 + shift))
    throw DomainError("convergence score: window or shifted window outside the stored range");
  double best = 0;
  for (std::int64_t k = window_begin; k < window_end; ++k)
    best = std::max(best, dist2(seq.at(k + shift), seq.at(k)));
  return best;
}

WitnessReport find_witnesses(const VectorSequence& seq, std::int64_t window_start,
                             std::int64_t window_len, int num, double delta0_floor,
                             bool parallel) {
  if (window_len <= 0) throw DomainError("witness search: window length must be positive");
  if (num <= 0) throw DomainError("witness search: number of witnesses must be positive");
  if (!(delta0_floor > 0)) throw DomainError("witness search: delta0 floor must be positive");
  if (!seq.stored(window_start))
    throw DomainError("witness search: window start outside the stored range");
  // Largest ζ keeping the shifted window stored, mirroring ζ < L − window_len.
  const std::int64_t max_shift = seq.end_index() - window_start - window_len - 1;
  if (max_shift < 1) throw DomainError("witness search: sequence too short for the window");

  const auto scores = kernels::shift_scores(
      seq, window_start, window_len, max_shift,
      parallel ? kernels::Exec::Parallel : kernels::Exec::Serial);

  std::vector<std::int64_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::int64_t>(i) + 1;
  std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return scores[static_cast<std::size_t>(a - 1)] < scores[static_cast<std::size_t>(b - 1)];
  });

  std::vector<std::int64_t> picked;
  double last = -1;
  for (std::int64_t z : order) {
    const double s = scores[static_cast<std::size_t>(z - 1)];
    if (!picked.empty() && s == last) continue;
    picked.push_back(z);
    last = s;
    if (static_cast<int>(picked.size()) == num) break;
  }

  WitnessReport report;
  report.window_start = window_start;
  report.window_len = window_len;
  report.delta0_floor = delta0_floor;
  for (std::int64_t z : picked) {
    for (std::int64_t eta = 1; eta + z < seq.end_index(); ++eta) {
      const double sep = dist2(seq.at(z + eta), seq.at(eta));
      if (sep >= delta0_floor) {
        report.witnesses.push_back({z, scores[static_cast<std::size_t>(z - 1)], eta, sep});
        break;
      }
    }
  }
  std::sort(report.witnesses.begin(), report.witnesses.end(),
            [](const Witness& a, const Witness& b) { return a.score > b.score; });
  if (!report.witnesses.empty()) {
    report.delta0_est = report.witnesses.front().separation;
    for (const auto& w : report.witnesses) report.delta0_est = std::min(report.delta0_est, w.separation);
  }
  if (static_cast<int>(report.witnesses.size()) < num) {
    report.warning = true;
    report.message = "only " + std::to_string(report.witnesses.size()) + " of " +
                     std::to_string(num) + " witnesses found";
  }
  return report;
}

}  // namespace impulsive
