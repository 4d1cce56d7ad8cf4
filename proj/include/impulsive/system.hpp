#pragma once

// The quasilinear impulsive system
//   x' = A x + f(t, x) + g(t),             t ≠ θ_k
//   x(θ_k+) = (I + B) x(θ_k) + h(x(θ_k)),
// with g(t) = σ_k on (θ_{kp}, θ_{(k+1)p}], together with its hypothesis
// checks, matriciant, decay-bound fit, and the constants derived from them.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "impulsive/expr.hpp"
#include "impulsive/kernels.hpp"
#include "impulsive/matops.hpp"
#include "impulsive/schedule.hpp"
#include "impulsive/signals.hpp"

namespace impulsive {

class QuasilinearImpulsiveSystem {
 public:
  /// Validates dimensions, variable usage (f over t and x, h over x only),
  /// and ω-periodicity of f in t on a sample grid.
  QuasilinearImpulsiveSystem(Matrix A, Matrix B, std::vector<Expression> f,
                             std::vector<Expression> h, ImpulseSchedule schedule,
                             std::shared_ptr<const VectorSequence> perturbation);

  std::size_t dim() const noexcept { return A_.dim(); }
  const Matrix& A() const noexcept { return A_; }
  const Matrix& B() const noexcept { return B_; }
  const Matrix& jump_matrix() const noexcept { return IB_; }  ///< I + B
  const std::vector<Expression>& f() const noexcept { return f_; }
  const std::vector<Expression>& h() const noexcept { return h_; }
  const ImpulseSchedule& schedule() const noexcept { return schedule_; }
  const VectorSequence& perturbation() const noexcept { return *perturbation_; }
  std::shared_ptr<const VectorSequence> perturbation_ptr() const noexcept { return perturbation_; }
  double f_period() const noexcept { return schedule_.omega(); }

  void eval_f(double t, std::span<const double> x, std::span<double> out) const;
  void eval_h(std::span<const double> x, std::span<double> out) const;

  /// x⁺ = (I+B)x + h(x).
  void jump(std::span<const double> x, std::span<double> out) const;

  /// g(t) = σ_{block_index(t)}.
  std::span<const double> g(double t) const { return perturbation_value(*perturbation_, schedule_, t); }

  /// Same system driven by another sequence.
  QuasilinearImpulsiveSystem with_perturbation(std::shared_ptr<const VectorSequence> seq) const;

  /// Same system with f ≡ 0 and h ≡ 0.
  QuasilinearImpulsiveSystem linear_part() const;

  /// Stable text fingerprint (FNV-1a of the defining data), for metadata.
  std::string fingerprint() const;

 private:
  Matrix A_, B_, IB_;
  std::vector<Expression> f_, h_;
  ImpulseSchedule schedule_;
  std::shared_ptr<const VectorSequence> perturbation_;
};

enum class ConstantSource { Provided, Estimated, Fitted, Default };
const char* to_string(ConstantSource s);

struct SystemConstants {
  double M_f = 0, M_h = 0, L_f = 0, L_h = 0, M_sigma = 0, N = 0, lambda = 0;
  std::map<std::string, ConstantSource> source;

  /// Throws DomainError unless every constant is strictly positive and finite.
  void validate() const;
};

// ---------------------------------------------------------------- sampling

struct SamplingOptions {
  double halfwidth = 25;            ///< box [−w, w]^m
  std::size_t points_per_axis = 201;
  std::size_t t_points = 64;        ///< over one period [0, ω)
  std::size_t max_points = 4'000'000;  ///< per t slice; points per axis shrink to fit
};

struct ConstantEstimate {
  double raw = 0;     ///< sampled value
  double value = 0;   ///< raw × 1.01, floored at 1e−12
  bool floored = false;
};

struct FunctionConstants {
  ConstantEstimate M_f, M_h, L_f, L_h;
  std::size_t points_per_axis = 0;
  std::size_t t_points = 0;
  double halfwidth = 0;
};

FunctionConstants estimate_function_constants(const QuasilinearImpulsiveSystem& sys,
                                              const SamplingOptions& opt = {},
                                              kernels::Exec exec = kernels::Exec::Parallel);

// -------------------------------------------------------------- hypotheses

struct HypothesisCheck {
  std::string id;         ///< "A1" .. "A7"
  std::string statement;  ///< the inequality in words
  bool checkable = true;
  bool holds = false;
  double lhs = 0;
  double rhs = 0;
  std::vector<std::pair<std::string, double>> details;
  std::string note;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  SystemConstants constants;
  std::vector<Complex> eigenvalues;  ///< of A + (p/ω) log(I+B), when available

  bool all_hold() const;
  /// True when every listed assumption holds.
  bool hold(std::initializer_list<const char*> ids) const;
  const HypothesisCheck& get(const std::string& id) const;
};

HypothesisReport check_hypotheses(const QuasilinearImpulsiveSystem& sys,
                                  const SystemConstants& consts);

/// A + (p/ω)·log(I+B).
Matrix averaged_matrix(const QuasilinearImpulsiveSystem& sys);

// -------------------------------------------------------------- matriciant

/// U(t,s) = e^{A(t−s)}(I+B)^{i([s,t))}; requires t ≥ s.
Matrix cauchy_matrix(const QuasilinearImpulsiveSystem& sys, double t, double s);

/// U(t, θ_k+) = e^{A(t−θ_k)}(I+B)^{i((θ_k,t))}; requires t ≥ θ_k.
Matrix cauchy_matrix_after(const QuasilinearImpulsiveSystem& sys, double t, double theta);

struct DecayFitOptions {
  std::size_t s_points = 100;    ///< uniform points on [0, ω)
  std::size_t tau_points = 2000; ///< uniform intervals on [0, horizon]
  double impulse_offset = 1e-9;  ///< grid points on both sides of each θ_k
};

struct DecayFit {
  double N_fit = 0;
  double lambda = 0;
  double horizon = 0;
  std::vector<double> s_grid;
  std::vector<double> tau_grid;
  std::vector<double> profile;  ///< max over s of ‖U(s+τ, s)‖e^{λτ}, per τ
};

/// N_fit = max over the grid of ‖U(s+τ, s)‖·e^{λτ}. Throws NumericError
/// ("λ exceeds the decay rate") when the last tenth of the horizon holds a
/// larger value than the rest.
DecayFit fit_decay_bound(const QuasilinearImpulsiveSystem& sys, double lambda, double horizon,
                         const DecayFitOptions& opt = {},
                         kernels::Exec exec = kernels::Exec::Parallel);

/// 0.8 × (−max Re eig(A + (p/ω) log(I+B))).
double default_lambda(const QuasilinearImpulsiveSystem& sys);

// --------------------------------------------------------------- derived

struct DerivedConstants {
  double gamma = 0;
  double K1 = 0;
  double K2 = 0;
  double M_phi = 0;
  double R_0 = 0;
  double theta_bar = 0;
  // These scale with δ₀ and are absent when δ₀ is unknown.
  std::optional<double> delta0;
  std::optional<double> H_0;
  std::optional<double> epsilon_0;
  std::optional<double> r;
  // Norms entering the formulas.
  double norm_A = 0, norm_B = 0, norm_jump = 0, norm_jump_inv = 0;
};

/// Throws HypothesisError when γ ≤ 0 ("(A6) violated") or, with δ₀ given,
/// when L_h‖(I+B)⁻¹‖ ≥ 1 ("(A7) violated").
DerivedConstants compute_derived_constants(const SystemConstants& consts,
                                           const QuasilinearImpulsiveSystem& sys,
                                           std::optional<double> delta0);

// ---------------------------------------------------------------- Gronwall

struct GronwallImpulse {
  double theta = 0;
  double beta = 0;
};

/// Evaluates
///   a(t) + ∫_{t1}^t a(s)b(s) Π_{s<θ_k<t}(1+β_k) e^{∫_s^t b} ds
///        + Σ_{t1<θ_k<t} a(θ_k) β_k Π_{θ_k<θ_j<t}(1+β_j) e^{∫_{θ_k}^t b}
/// with adaptive Simpson quadrature on each continuity segment. a and b are
/// left-continuous; b must be non-negative and every β_k ≥ 0.
double gronwall_bound(double t1, double t, const std::function<double(double)>& a,
                      const std::function<double(double)>& b,
                      std::span<const GronwallImpulse> impulses, double rel_tol = 1e-10);

}  // namespace impulsive
