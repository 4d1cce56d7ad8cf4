#pragma once

// Fixed-step RK4 integration between impulse moments with exact jump
// application, plus the bounded solution, its integral-equation residual and
// a two-trajectory stability probe.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "impulsive/matops.hpp"
#include "impulsive/system.hpp"

namespace impulsive {

enum class Side { Left, Right };

struct Jump {
  std::int64_t k = 0;
  double theta = 0;
  Vector left;
  Vector right;
  std::size_t node = 0;  ///< index of the node at t = θ_k
};

struct TrajectoryMeta {
  double step = 0;
  std::string system_fingerprint;
  std::string extension_policy;
  std::string start_convention = "a jump at t0 is not applied; x0 is the post-jump state";
  std::string end_convention = "a jump at t1 is not applied";
  double t_transient = 0;  ///< bounded solution only
  double tol = 0;          ///< bounded solution only
};

/// Piecewise-continuous solution record. Node states are left values; at an
/// impulse node the matching Jump also carries the right value.
class Trajectory {
 public:
  explicit Trajectory(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  double time(std::size_t i) const { return times_[i]; }
  const std::vector<double>& times() const noexcept { return times_; }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }

  std::span<const double> state(std::size_t i) const {
    return std::span<const double>(states_).subspan(i * dim_, dim_);
  }
  /// Right value at an impulse node, the node state otherwise.
  std::span<const double> state_after(std::size_t i) const;

  const std::vector<Jump>& jumps() const noexcept { return jumps_; }
  /// Index into jumps() for node i, or −1.
  int jump_at(std::size_t i) const { return jump_of_node_[i]; }

  /// Largest i with time(i) ≤ t; requires t_begin() ≤ t.
  std::size_t locate(double t) const;

  void push(double t, std::span<const double> x);
  /// Marks the last node as impulse θ_k with the given right value.
  void mark_jump(std::int64_t k, std::span<const double> right);

  TrajectoryMeta meta;

 private:
  std::size_t dim_;
  std::vector<double> times_;
  std::vector<double> states_;
  std::vector<Jump> jumps_;
  std::vector<int> jump_of_node_;
};

/// Integrates from (t0, x0) to t1 with RK4 on each inter-impulse segment,
/// subdivided into ⌈length/step⌉ equal steps. Jumps are applied at every
/// θ_k in (t0, t1). Throws NumericError when the state becomes non-finite.
Trajectory integrate(const QuasilinearImpulsiveSystem& sys, double t0, std::span<const double> x0,
                     double t1, double step);

/// Solution value at t, by a partial RK4 step from the preceding node. At an
/// impulse moment `side` picks the left or right value.
Vector evaluate(const Trajectory& traj, const QuasilinearImpulsiveSystem& sys, double t,
                Side side = Side::Left);

/// Copy of traj restricted to [t_start, ∞), with a node inserted at t_start.
Trajectory trim_front(const Trajectory& traj, const QuasilinearImpulsiveSystem& sys,
                      double t_start);

struct BoundedOptions {
  double step = 0;                         ///< 0: ω/2000
  std::optional<double> transient_override;  ///< replaces the computed transient length
};

/// Length T with C·e^{−γT} ≤ tol, C = 2·M_φ·N·(1+N·L_h)^p, rounded up to
/// whole periods (at least one).
double transient_length(const SystemConstants& consts, const QuasilinearImpulsiveSystem& sys,
                        double tol);

/// Approximates the solution bounded on the whole axis on [t_start, t_end]
/// by integrating from zero state over a whole-period transient that starts
/// at an impulse moment. Throws HypothesisError unless (A1)–(A6) hold.
Trajectory bounded_solution(const QuasilinearImpulsiveSystem& sys, const SystemConstants& consts,
                            double t_start, double t_end, double tol,
                            const BoundedOptions& opt = {});

/// Tail length T with N e^{−λT}((M_f+M_σ)/λ + pM_h/(1−e^{−λω})) ≤ tol.
double residual_tail_length(const SystemConstants& consts, const QuasilinearImpulsiveSystem& sys,
                            double tol);

/// max over sample times of ‖φ(t) − RHS(t)‖, the integral form truncated to
/// (t − T_tail, t].
double integral_equation_residual(const Trajectory& traj, const QuasilinearImpulsiveSystem& sys,
                                  std::span<const double> sample_times, double T_tail,
                                  double quad_tol = 1e-10);

struct StabilityOptions {
  double step = 0;  ///< 0: ω/2000
  std::optional<double> fit_begin;  ///< default t0 + (t1 − t0)/4
  std::optional<double> fit_end;    ///< default t1
};

struct StabilityResult {
  double slope = 0;
  bool degenerate = false;  ///< identical initial states
  bool underflow = false;   ///< difference reached zero; fit uses the prefix
  std::size_t samples = 0;
  double fit_begin = 0, fit_end = 0;
};

/// Least-squares slope of ln‖x_b(t) − x_a(t)‖ over the fit window, sampled
/// at every integration node. The difference is integrated as its own
/// system so it stays resolvable far below the states' rounding level.
StabilityResult stability_probe(const QuasilinearImpulsiveSystem& sys, std::span<const double> x0_a,
                                std::span<const double> x0_b, double t0, double t1,
                                const StabilityOptions& opt = {});

/// max ‖x‖ over all nodes and jump right values.
double sup_norm(const Trajectory& traj);

/// max ‖x_{i+1} − x_i‖/(t_{i+1} − t_i) over consecutive nodes of one
/// continuity interval (right values after jumps).
double max_interior_slope(const Trajectory& traj);

/// max over jumps of ‖right − ((I+B)left + h(left))‖.
double max_jump_law_error(const Trajectory& traj, const QuasilinearImpulsiveSystem& sys);

}  // namespace impulsive
