#pragma once

// Numerical counterparts of the shift-convergence and separation properties
// of the bounded solution, and the periodicity defect.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "impulsive/integrate.hpp"
#include "impulsive/signals.hpp"
#include "impulsive/system.hpp"

namespace impulsive {

/// Index window [start, start + len) of forcing blocks that drives the
/// solution on [a, b] after a warm-up of J periods: from α − J to β − 1,
/// where θ_{αp} ≤ a is the last block start not after a and θ_{βp} ≥ b the
/// first block start not before b.
std::pair<std::int64_t, std::int64_t> witness_window(const ImpulseSchedule& sched, double a,
                                                     double b, int J);

/// t + ζω, computed from the nearest impulse moment so that a time on one
/// side of θ_k maps to the same side of θ_{k+ζp}.
double shift_time(const ImpulseSchedule& sched, double t, std::int64_t zeta);

/// Bounded solution on [begin, end] and, for each shift ζ, on the shifted
/// range. Both reports read from this one set of trajectories.
struct ShiftedSolutions {
  double begin = 0, end = 0;
  double tol = 0;
  Trajectory base;
  std::vector<std::int64_t> zetas;
  std::vector<Trajectory> shifted;

  /// ‖φ(t + ζ_i ω) − φ(t)‖, comparing the same one-sided values at impulses.
  double difference(const QuasilinearImpulsiveSystem& sys, std::size_t i, double t,
                    Side side = Side::Left) const;
};

ShiftedSolutions compute_shifted_solutions(const QuasilinearImpulsiveSystem& sys,
                                           const SystemConstants& consts,
                                           std::vector<std::int64_t> zetas, double begin,
                                           double end, double tol, double step = 0);

struct ShiftConvergenceEntry {
  std::int64_t zeta = 0;
  double mu = 0;        ///< ω·ζ
  double score = 0;     ///< sequence score over the witness window
  double sup_diff = 0;  ///< sup over the compact of ‖φ(t+μ) − φ(t)‖
  double cap = 0;       ///< K1·e^{−γωJ} + K2·score
  bool exceeds = false;
};

struct ShiftConvergenceReport {
  double a = 0, b = 0;
  int J = 0;
  std::int64_t window_start = 0, window_len = 0;
  double K1 = 0, K2 = 0, gamma = 0;
  std::vector<ShiftConvergenceEntry> entries;
  bool any_exceeds = false;
  /// The smallest score comes with the smallest sup-difference.
  bool best_is_smallest = false;
};

/// For each ctx shift: sup over the base nodes in [a, b] (both one-sided
/// values at impulses) of the shifted difference, and its cap.
ShiftConvergenceReport shift_convergence(const QuasilinearImpulsiveSystem& sys,
                                         const DerivedConstants& derived,
                                         const ShiftedSolutions& ctx, double a, double b, int J);

struct SeparationEntry {
  std::int64_t zeta = 0, eta = 0;
  double mu = 0;
  double scan_begin = 0, scan_end = 0;
  double coarse_max = 0;  ///< largest difference seen on the coarse pass
  bool found = false;
  double tau = 0;
  double inf_diff = 0;    ///< min over the best window's samples
};

struct SeparationReport {
  double r = 0;
  double epsilon_0 = 0;
  double sample_step = 0;
  std::vector<SeparationEntry> entries;
  std::size_t found_count() const;
};

/// For each witness (ζ_n, η_n), scans [θ_{η p} − r, θ_{(η+1)p} + r]: a coarse
/// pass at trajectory nodes ranks candidate centres, then windows
/// [τ − r, τ + r] around the best candidates and around each impulse moment
/// are sampled with spacing `sample_step` (default r/50). The window with the
/// largest minimum is kept; it counts as found when that minimum ≥ ε₀.
/// `witnesses[n].zeta` must equal `ctx.zetas[n]`.
SeparationReport separation_scan(const QuasilinearImpulsiveSystem& sys,
                                 const DerivedConstants& derived,
                                 const std::vector<Witness>& witnesses,
                                 const ShiftedSolutions& ctx,
                                 std::optional<double> sample_step = std::nullopt,
                                 std::optional<double> epsilon_override = std::nullopt);

/// sup over nodes t in [a, b − period] of ‖x(t + period) − x(t)‖, comparing
/// both one-sided values at impulse nodes. Values at t + period come from the
/// matching node when one lies within 1e−9, else by linear interpolation.
double periodicity_defect(const Trajectory& traj, double period,
                          std::optional<std::pair<double, double>> range = std::nullopt);

}  // namespace impulsive
