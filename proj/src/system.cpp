#include "impulsive/system.hpp"

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "impulsive/errors.hpp"
#include "impulsive/quadrature.hpp"

namespace impulsive {

namespace {

void check_periodic_in_t(const std::vector<Expression>& f, double omega, std::size_t m) {
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::vector<double> x(m);
  for (int sample = 0; sample < 8; ++sample) {
    for (double& v : x) v = coord(rng);
    for (int j = 0; j < 16; ++j) {
      const double t = omega * j / 16.0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        double a = 0, b = 0;
        try {
          a = f[i].eval(Env{t, std::nullopt, x});
          b = f[i].eval(Env{t + omega, std::nullopt, x});
        } catch (const EvalError&) {
          continue;  // only compare where f is defined
        }
        if (std::abs(a - b) > Tolerances::kPeriodicity * std::max(1.0, std::abs(a)))
          throw DomainError("f" + std::to_string(i + 1) + " is not periodic in t with period " +
                            std::to_string(omega));
      }
    }
  }
}

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
}

void fnv_doubles(std::uint64_t& h, std::span<const double> v) {
  fnv_bytes(h, v.data(), v.size() * sizeof(double));
}

void fnv_string(std::uint64_t& h, const std::string& s) { fnv_bytes(h, s.data(), s.size()); }

}  // namespace

QuasilinearImpulsiveSystem::QuasilinearImpulsiveSystem(
    Matrix A, Matrix B, std::vector<Expression> f, std::vector<Expression> h,
    ImpulseSchedule schedule, std::shared_ptr<const VectorSequence> perturbation)
    : A_(std::move(A)),
      B_(std::move(B)),
      f_(std::move(f)),
      h_(std::move(h)),
      schedule_(std::move(schedule)),
      perturbation_(std::move(perturbation)) {
  const std::size_t m = A_.dim();
  if (m == 0 || m > Tolerances::kMaxDim) throw DomainError("system: dimension must lie in [1, 64]");
  if (B_.dim() != m) throw DomainError("system: A and B have different sizes");
  if (!A_.all_finite() || !B_.all_finite()) throw DomainError("system: non-finite matrix entry");
  if (f_.size() != m) throw DomainError("system: f needs " + std::to_string(m) + " components");
  if (h_.size() != m) throw DomainError("system: h needs " + std::to_string(m) + " components");
  if (!perturbation_) throw DomainError("system: missing perturbation sequence");
  if (perturbation_->dim() != m)
    throw DomainError("system: perturbation has dimension " +
                      std::to_string(perturbation_->dim()) + ", expected " + std::to_string(m));
  for (std::size_t i = 0; i < m; ++i) {
    require_variables(f_[i], true, false, static_cast<int>(m), "f" + std::to_string(i + 1));
    require_variables(h_[i], false, false, static_cast<int>(m), "h" + std::to_string(i + 1));
  }
  IB_ = Matrix::identity(m) + B_;
  check_periodic_in_t(f_, schedule_.omega(), m);
}

void QuasilinearImpulsiveSystem::eval_f(double t, std::span<const double> x,
                                        std::span<double> out) const {
  const Env env{t, std::nullopt, x};
  for (std::size_t i = 0; i < f_.size(); ++i) out[i] = f_[i].eval(env);
}

void QuasilinearImpulsiveSystem::eval_h(std::span<const double> x, std::span<double> out) const {
  const Env env{std::nullopt, std::nullopt, x};
  for (std::size_t i = 0; i < h_.size(); ++i) out[i] = h_[i].eval(env);
}

void QuasilinearImpulsiveSystem::jump(std::span<const double> x, std::span<double> out) const {
  const std::size_t m = dim();
  std::array<double, Tolerances::kMaxDim> hx;
  eval_h(x, std::span<double>(hx.data(), m));
  IB_.apply_into(x, out);
  for (std::size_t i = 0; i < m; ++i) out[i] += hx[i];
}

QuasilinearImpulsiveSystem QuasilinearImpulsiveSystem::with_perturbation(
    std::shared_ptr<const VectorSequence> seq) const {
  return QuasilinearImpulsiveSystem(A_, B_, f_, h_, schedule_, std::move(seq));
}

QuasilinearImpulsiveSystem QuasilinearImpulsiveSystem::linear_part() const {
  std::vector<Expression> zero(dim(), parse("0"));
  return QuasilinearImpulsiveSystem(A_, B_, zero, zero, schedule_, perturbation_);
}

std::string QuasilinearImpulsiveSystem::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  fnv_doubles(h, A_.data());
  fnv_doubles(h, B_.data());
  for (const auto& e : f_) fnv_string(h, e.to_string());
  for (const auto& e : h_) fnv_string(h, e.to_string());
  const double omega = schedule_.omega();
  fnv_doubles(h, std::span<const double>(&omega, 1));
  fnv_doubles(h, schedule_.base());
  const std::int64_t first = perturbation_->first_index();
  fnv_bytes(h, &first, sizeof first);
  for (std::int64_t k = first; k < perturbation_->end_index(); ++k)
    fnv_doubles(h, perturbation_->at(k));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

const char* to_string(ConstantSource s) {
  switch (s) {
    case ConstantSource::Provided: return "provided";
    case ConstantSource::Estimated: return "estimated";
    case ConstantSource::Fitted: return "fitted";
    case ConstantSource::Default: return "default";
  }
  return "?";
}

void SystemConstants::validate() const {
  const std::pair<const char*, double> all[] = {{"M_f", M_f}, {"M_h", M_h}, {"L_f", L_f},
                                                {"L_h", L_h}, {"M_sigma", M_sigma}, {"N", N},
                                                {"lambda", lambda}};
  for (const auto& [name, v] : all)
    if (!(v > 0) || !std::isfinite(v))
      throw DomainError(std::string("constant ") + name + " must be positive and finite");
}

// ---------------------------------------------------------------- sampling

FunctionConstants estimate_function_constants(const QuasilinearImpulsiveSystem& sys,
                                              const SamplingOptions& opt, kernels::Exec exec) {
  if (opt.points_per_axis < 10) throw DomainError("sampling: need at least 10 points per axis");
  if (!(opt.halfwidth > 0) || !std::isfinite(opt.halfwidth))
    throw DomainError("sampling: box half-width must be positive");
  if (opt.t_points == 0) throw DomainError("sampling: need at least one t point");
  const std::size_t m = sys.dim();

  std::size_t n = opt.points_per_axis;
  auto fits = [&](std::size_t k) {
    double total = 1;
    for (std::size_t d = 0; d < m; ++d) total *= static_cast<double>(k);
    return total <= static_cast<double>(opt.max_points);
  };
  while (n > 10 && !fits(n)) --n;
  if (!fits(n))
    throw DomainError("sampling: box grid too large in dimension " + std::to_string(m) +
                      "; provide M_f, M_h, L_f, L_h explicitly");

  kernels::BoxGrid box;
  box.dim = m;
  box.halfwidth = opt.halfwidth;
  box.points_per_axis = n;
  const bool f_uses_t = std::any_of(sys.f().begin(), sys.f().end(),
                                    [](const Expression& e) { return e.variables().uses_t; });
  const std::size_t t_points = f_uses_t ? opt.t_points : 1;
  for (std::size_t j = 0; j < t_points; ++j)
    box.t_values.push_back(sys.f_period() * static_cast<double>(j) /
                           static_cast<double>(t_points));
  const auto fs = kernels::sample_function(sys.f(), box, exec);
  box.t_values.clear();
  const auto hs = kernels::sample_function(sys.h(), box, exec);

  auto finish = [](double raw) {
    ConstantEstimate e;
    e.raw = raw;
    e.value = raw * Tolerances::kInflation;
    if (!(e.value >= Tolerances::kConstantFloor)) {
      e.value = Tolerances::kConstantFloor;
      e.floored = true;
    }
    return e;
  };
  FunctionConstants out;
  out.M_f = finish(fs.sup_norm);
  out.L_f = finish(fs.lipschitz);
  out.M_h = finish(hs.sup_norm);
  out.L_h = finish(hs.lipschitz);
  out.points_per_axis = n;
  out.t_points = t_points;
  out.halfwidth = opt.halfwidth;
  return out;
}

// -------------------------------------------------------------- hypotheses

Matrix averaged_matrix(const QuasilinearImpulsiveSystem& sys) {
  const double scale = sys.schedule().p() / sys.schedule().omega();
  return sys.A() + mat_log_principal(sys.jump_matrix()) * scale;
}

bool HypothesisReport::all_hold() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.holds; });
}

bool HypothesisReport::hold(std::initializer_list<const char*> ids) const {
  for (const char* id : ids)
    if (!get(id).holds) return false;
  return true;
}

const HypothesisCheck& HypothesisReport::get(const std::string& id) const {
  for (const auto& c : checks)
    if (c.id == id) return c;
  throw DomainError("no hypothesis named " + id);
}

HypothesisReport check_hypotheses(const QuasilinearImpulsiveSystem& sys,
                                  const SystemConstants& consts) {
  HypothesisReport rep;
  rep.constants = consts;
  const Matrix& A = sys.A();
  const Matrix& B = sys.B();
  const double p = sys.schedule().p();
  const double omega = sys.schedule().omega();
  const double N = consts.N, lam = consts.lambda;

  {
    HypothesisCheck c{"A1", "A and B commute and det(I+B) != 0", true, false, 0, 0, {}, {}};
    c.lhs = spectral_norm(A * B - B * A);
    c.rhs = Tolerances::kCommutator * spectral_norm(A) * spectral_norm(B);
    const double det = determinant(sys.jump_matrix());
    c.details = {{"commutator_norm", c.lhs},
                 {"commutator_tolerance", c.rhs},
                 {"det_I_plus_B", det},
                 {"det_floor", Tolerances::kDetFloor}};
    c.holds = c.lhs <= c.rhs && std::abs(det) > Tolerances::kDetFloor;
    rep.checks.push_back(c);
  }
  {
    HypothesisCheck c{"A2", "eigenvalues of A + (p/omega) log(I+B) have negative real parts",
                      true, false, 0, 0, {}, {}};
    try {
      rep.eigenvalues = eigenvalues(averaged_matrix(sys));
      c.lhs = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
        c.lhs = std::max(c.lhs, rep.eigenvalues[i].real());
        c.details.emplace_back("eig" + std::to_string(i + 1) + "_re", rep.eigenvalues[i].real());
        c.details.emplace_back("eig" + std::to_string(i + 1) + "_im", rep.eigenvalues[i].imag());
      }
      c.rhs = 0;
      c.holds = c.lhs < c.rhs;
    } catch (const NumericError& e) {
      c.checkable = false;
      c.note = std::string("not checkable: ") + e.what();
    }
    rep.checks.push_back(c);
  }
  {
    HypothesisCheck c{"A3", "M_f > 0 and M_h > 0 bound f and h", true, false, 0, 0, {}, {}};
    c.lhs = std::min(consts.M_f, consts.M_h);
    c.details = {{"M_f", consts.M_f}, {"M_h", consts.M_h}, {"M_sigma", consts.M_sigma}};
    c.holds = c.lhs > 0 && std::isfinite(consts.M_f) && std::isfinite(consts.M_h) &&
              consts.M_sigma > 0 && std::isfinite(consts.M_sigma);
    rep.checks.push_back(c);
  }
  {
    HypothesisCheck c{"A4", "L_f > 0 and L_h > 0 are Lipschitz constants of f and h", true, false,
                      0, 0, {}, {}};
    c.lhs = std::min(consts.L_f, consts.L_h);
    c.details = {{"L_f", consts.L_f}, {"L_h", consts.L_h}};
    c.holds = c.lhs > 0 && std::isfinite(consts.L_f) && std::isfinite(consts.L_h);
    rep.checks.push_back(c);
  }
  {
    HypothesisCheck c{"A5", "N (L_f/lambda + p L_h/(1 - exp(-lambda omega))) < 1", true, false, 0,
                      1, {}, {}};
    c.lhs = N * (consts.L_f / lam + p * consts.L_h / (1 - std::exp(-lam * omega)));
    c.holds = c.lhs < c.rhs;
    rep.checks.push_back(c);
  }
  {
    HypothesisCheck c{"A6", "N L_f + (p/omega) ln(1 + N L_h) < lambda", true, false, 0, lam, {},
                      {}};
    c.lhs = N * consts.L_f + p / omega * std::log(1 + N * consts.L_h);
    c.holds = c.lhs < c.rhs;
    rep.checks.push_back(c);
  }
  {
    HypothesisCheck c{"A7", "L_h ||(I+B)^-1|| < 1", true, false, 0, 1, {}, {}};
    try {
      const double inv_norm = spectral_norm(inverse(sys.jump_matrix()));
      c.lhs = consts.L_h * inv_norm;
      c.details = {{"norm_inverse_I_plus_B", inv_norm}};
      c.holds = c.lhs < c.rhs;
    } catch (const NumericError& e) {
      c.checkable = false;
      c.note = std::string("not checkable: ") + e.what();
    }
    rep.checks.push_back(c);
  }
  return rep;
}

double default_lambda(const QuasilinearImpulsiveSystem& sys) {
  double top = -std::numeric_limits<double>::infinity();
  for (const Complex& z : eigenvalues(averaged_matrix(sys))) top = std::max(top, z.real());
  if (!(top < 0)) throw HypothesisError("(A2) violated: the linear flow does not decay");
  return -0.8 * top;
}

// -------------------------------------------------------------- matriciant

Matrix cauchy_matrix(const QuasilinearImpulsiveSystem& sys, double t, double s) {
  if (!(t >= s)) throw DomainError("matriciant: requires t >= s");
  if (t == s) return Matrix::identity(sys.dim());
  const auto n = sys.schedule().count_impulses(s, t, true);
  return mat_exp(sys.A() * (t - s)) * power(sys.jump_matrix(), n);
}

Matrix cauchy_matrix_after(const QuasilinearImpulsiveSystem& sys, double t, double theta) {
  if (!(t >= theta)) throw DomainError("matriciant: requires t >= theta");
  if (t == theta) return Matrix::identity(sys.dim());
  const auto n = sys.schedule().count_impulses(theta, t, false);
  return mat_exp(sys.A() * (t - theta)) * power(sys.jump_matrix(), n);
}

DecayFit fit_decay_bound(const QuasilinearImpulsiveSystem& sys, double lambda, double horizon,
                         const DecayFitOptions& opt, kernels::Exec exec) {
  const auto& sched = sys.schedule();
  const double omega = sched.omega();
  if (!(lambda > 0)) throw DomainError("decay fit: lambda must be positive");
  if (!(horizon >= 5 * omega)) throw DomainError("decay fit: horizon must be at least 5 periods");
  if (opt.s_points == 0 || opt.tau_points < 10) throw DomainError("decay fit: grid too coarse");
  const double off = opt.impulse_offset;

  DecayFit fit;
  fit.lambda = lambda;
  fit.horizon = horizon;
  for (std::size_t a = 0; a < opt.s_points; ++a)
    fit.s_grid.push_back(omega * static_cast<double>(a) / static_cast<double>(opt.s_points));
  for (double th : sched.base()) {
    const double r = th - omega * std::floor(th / omega);
    for (double s : {r - off, r, r + off})
      if (s >= 0 && s < omega) fit.s_grid.push_back(s);
  }
  std::sort(fit.s_grid.begin(), fit.s_grid.end());
  fit.s_grid.erase(std::unique(fit.s_grid.begin(), fit.s_grid.end()), fit.s_grid.end());

  for (std::size_t j = 0; j <= opt.tau_points; ++j)
    fit.tau_grid.push_back(horizon * static_cast<double>(j) / static_cast<double>(opt.tau_points));
  for (double s : fit.s_grid) {
    for (auto k = sched.first_index_after(s, false); sched.theta(k) <= s + horizon + off; ++k) {
      for (double tau : {sched.theta(k) - s - off, sched.theta(k) - s + off})
        if (tau >= 0 && tau <= horizon) fit.tau_grid.push_back(tau);
    }
  }
  std::sort(fit.tau_grid.begin(), fit.tau_grid.end());
  fit.tau_grid.erase(std::unique(fit.tau_grid.begin(), fit.tau_grid.end()), fit.tau_grid.end());

  kernels::DecayGrid grid;
  grid.num_s = fit.s_grid.size();
  for (double tau : fit.tau_grid) {
    grid.exp_tau.push_back(mat_exp(sys.A() * tau));
    grid.weight.push_back(std::exp(lambda * tau));
  }
  int max_count = 0;
  grid.counts.resize(grid.num_s * fit.tau_grid.size());
  for (std::size_t a = 0; a < grid.num_s; ++a) {
    for (std::size_t j = 0; j < fit.tau_grid.size(); ++j) {
      const double s = fit.s_grid[a];
      const int c = static_cast<int>(sched.count_impulses(s, s + fit.tau_grid[j], true));
      grid.counts[a * fit.tau_grid.size() + j] = c;
      max_count = std::max(max_count, c);
    }
  }
  grid.jump_powers.push_back(Matrix::identity(sys.dim()));
  for (int i = 1; i <= max_count; ++i)
    grid.jump_powers.push_back(grid.jump_powers.back() * sys.jump_matrix());

  fit.profile = kernels::decay_profile(grid, exec);
  double head = 0, tail = 0;
  for (std::size_t j = 0; j < fit.tau_grid.size(); ++j) {
    if (fit.tau_grid[j] < 0.9 * horizon) {
      head = std::max(head, fit.profile[j]);
    } else {
      tail = std::max(tail, fit.profile[j]);
    }
  }
  if (tail > head) throw NumericError("lambda exceeds the decay rate");
  fit.N_fit = std::max(head, tail);
  return fit;
}

// --------------------------------------------------------------- derived

DerivedConstants compute_derived_constants(const SystemConstants& consts,
                                           const QuasilinearImpulsiveSystem& sys,
                                           std::optional<double> delta0) {
  consts.validate();
  const double p = sys.schedule().p();
  const double omega = sys.schedule().omega();
  const double m = static_cast<double>(sys.dim());
  const double N = consts.N, lam = consts.lambda;
  const double Mf = consts.M_f, Mh = consts.M_h, Ms = consts.M_sigma;
  const double Lf = consts.L_f, Lh = consts.L_h;

  DerivedConstants d;
  d.gamma = lam - N * Lf - p / omega * std::log(1 + N * Lh);
  if (!(d.gamma > 0)) throw HypothesisError("(A6) violated: gamma = " + std::to_string(d.gamma));

  const double jump_growth = std::pow(1 + N * Lh, p);
  const double lam_tail = 1 - std::exp(-lam * omega);
  d.M_phi = N * (Mf + Ms) / lam + p * N * Mh / lam_tail;
  d.K1 = (2 * N * (Mf + Ms) / lam + 2 * p * N * Mh / lam_tail) * jump_growth;
  d.K2 = N / lam + N * N * Lf * jump_growth / (lam * d.gamma) +
         N * N * p * Lh * jump_growth * std::exp(d.gamma * omega) /
             (lam * (1 - std::exp(-d.gamma * omega)));

  d.norm_A = spectral_norm(sys.A());
  d.norm_B = spectral_norm(sys.B());
  d.norm_jump = spectral_norm(sys.jump_matrix());
  d.norm_jump_inv = spectral_norm(inverse(sys.jump_matrix()));
  d.R_0 = d.norm_A * d.M_phi + Mf + Ms;
  d.theta_bar = sys.schedule().theta_bar();

  if (delta0) {
    if (!(*delta0 > 0)) throw DomainError("derived constants: delta0 must be positive");
    const double q = Lh * d.norm_jump_inv;
    if (!(q < 1)) throw HypothesisError("(A7) violated: L_h ||(I+B)^-1|| = " + std::to_string(q));
    const double H0 = omega * *delta0 /
                      ((2 + omega * (d.norm_A + Lf) + p * (d.norm_B + Lh)) * std::sqrt(m));
    d.delta0 = *delta0;
    d.H_0 = H0;
    d.epsilon_0 = H0 / 2 *
                  std::min({1.0, (1 - q) / (2 * d.norm_jump_inv), 1 / (2 * (d.norm_jump + Lh))});
    d.r = std::min({d.theta_bar / 3, H0 / (4 * d.R_0),
                    H0 * (1 - q) / (8 * d.R_0 * d.norm_jump_inv),
                    H0 / (8 * d.R_0 * (d.norm_jump + Lh))});
  }
  return d;
}

// ---------------------------------------------------------------- Gronwall

double gronwall_bound(double t1, double t, const std::function<double(double)>& a,
                      const std::function<double(double)>& b,
                      std::span<const GronwallImpulse> impulses, double rel_tol) {
  if (!(t1 <= t)) throw DomainError("gronwall: requires t1 <= t");
  for (const auto& imp : impulses)
    if (!(imp.beta >= 0)) throw DomainError("gronwall: beta_k must be non-negative");
  if (t == t1) return a(t);

  const auto bb = [&](double s) {
    const double v = b(s);
    if (!(v >= 0)) throw DomainError("gronwall: b must be non-negative");
    return v;
  };

  std::vector<GronwallImpulse> inside;
  for (const auto& imp : impulses)
    if (imp.theta > t1 && imp.theta < t) inside.push_back(imp);
  std::sort(inside.begin(), inside.end(),
            [](const auto& x, const auto& y) { return x.theta < y.theta; });

  // Segment i is (c[i], c[i+1]]; its left end is nudged so a and b read
  // their right limits there.
  std::vector<double> c{t1};
  for (const auto& imp : inside) c.push_back(imp.theta);
  c.push_back(t);
  const std::size_t nseg = c.size() - 1;
  auto left_end = [&](std::size_t i) { return std::nextafter(c[i], t); };

  const double fine = 1e-3 * rel_tol;
  std::vector<double> seg_b(nseg);
  for (std::size_t i = 0; i < nseg; ++i) {
    const double scale = (c[i + 1] - c[i]) * (bb(left_end(i)) + bb(c[i + 1]) + 1e-300);
    seg_b[i] = adaptive_simpson(bb, left_end(i), c[i + 1], fine * scale + 1e-300);
  }
  // tail[i] = ∫_{c[i]}^t b, prod[i] = Π (1+β) over impulses at c[i+1..nseg-1].
  std::vector<double> tail(nseg + 1, 0.0), prod(nseg + 1, 1.0);
  for (std::size_t i = nseg; i-- > 0;) {
    tail[i] = tail[i + 1] + seg_b[i];
    prod[i] = prod[i + 1] * (i + 1 < nseg ? 1 + inside[i].beta : 1.0);
  }

  double integral = 0;
  for (std::size_t i = 0; i < nseg; ++i) {
    const double lo = left_end(i), hi = c[i + 1];
    auto integrand = [&](double s) {
      const double bs = bb(s);
      if (bs == 0) return 0.0;
      const double inner =
          s >= hi ? 0.0 : adaptive_simpson(bb, s, hi, fine * (hi - s) * (bs + 1e-300) + 1e-300);
      return a(s) * bs * prod[i] * std::exp(inner + tail[i + 1]);
    };
    const double probe = std::abs(integrand(lo)) + std::abs(integrand(hi)) +
                         std::abs(integrand(0.5 * (lo + hi)));
    integral += adaptive_simpson(integrand, lo, hi, rel_tol * 1e-2 * probe * (hi - lo) + 1e-300);
  }

  double sum = 0;
  for (std::size_t k = 0; k < inside.size(); ++k)
    sum += a(inside[k].theta) * inside[k].beta * prod[k + 1] * std::exp(tail[k + 1]);

  return a(t) + integral + sum;
}

}  // namespace impulsive
