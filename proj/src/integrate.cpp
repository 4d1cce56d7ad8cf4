#include "impulsive/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "impulsive/errors.hpp"
#include "impulsive/quadrature.hpp"

namespace impulsive {

namespace {

constexpr double kMaxNodes = 5e7;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::int64_t step_count(double len, double step) {
  const double n = std::ceil(len / step * (1 - 1e-12));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct Rk4Work {
  explicit Rk4Work(std::size_t n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
  std::vector<double> k1, k2, k3, k4, tmp;
};

template <class Deriv>
void rk4(const Deriv& deriv, double t, std::span<const double> x, double h, std::span<double> out,
         Rk4Work& w) {
  const std::size_t n = x.size();
  deriv(t, x, std::span<double>(w.k1));
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = x[i] + 0.5 * h * w.k1[i];
  deriv(t + 0.5 * h, std::span<const double>(w.tmp), std::span<double>(w.k2));
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = x[i] + 0.5 * h * w.k2[i];
  deriv(t + 0.5 * h, std::span<const double>(w.tmp), std::span<double>(w.k3));
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = x[i] + h * w.k3[i];
  deriv(t + h, std::span<const double>(w.tmp), std::span<double>(w.k4));
  for (std::size_t i = 0; i < n; ++i)
    out[i] = x[i] + h / 6 * (w.k1[i] + 2 * w.k2[i] + 2 * w.k3[i] + w.k4[i]);
}

// x' = Ax + f(t,x) + g with g fixed for the segment.
struct SystemDeriv {
  const QuasilinearImpulsiveSystem& sys;
  std::span<const double> g;
  void operator()(double t, std::span<const double> x, std::span<double> dx) const {
    sys.eval_f(t, x, dx);
    const Matrix& A = sys.A();
    const std::size_t m = x.size();
    for (std::size_t i = 0; i < m; ++i) {
      double acc = dx[i] + g[i];
      for (std::size_t j = 0; j < m; ++j) acc += A(i, j) * x[j];
      dx[i] = acc;
    }
  }
};

// Shared segment loop. `make_deriv(t_mid)` builds the right-hand side for the
// segment containing t_mid; `on_node(t, x)` sees every node (left values);
// `apply_jump(k, x, out)` maps x(θ_k) to x(θ_k+) and `on_jump(k, right)`
// records it.
template <class MakeDeriv, class ApplyJump, class OnNode, class OnJump>
void drive(const ImpulseSchedule& sched, double t0, double t1, double step,
           std::vector<double>& x, const MakeDeriv& make_deriv, const ApplyJump& apply_jump,
           const OnNode& on_node, const OnJump& on_jump) {
  if (!(t1 > t0)) throw DomainError("integrate: requires t1 > t0");
  if (!(step > 0) || !std::isfinite(step)) throw DomainError("integrate: step must be positive");
  if (!all_finite(x)) throw DomainError("integrate: non-finite initial state");
  const double expected = (t1 - t0) / step + static_cast<double>(sched.p()) * (t1 - t0) /
                                                 sched.omega();
  if (expected > kMaxNodes) throw DomainError("integrate: too many steps; increase the step");

  const std::size_t n = x.size();
  std::vector<double> next(n);
  Rk4Work work(n);
  on_node(t0, std::span<const double>(x));
  std::int64_t k = sched.first_index_after(t0, true);
  double seg_start = t0;
  while (seg_start < t1) {
    const double theta = sched.theta(k);
    const double seg_end = std::min(theta, t1);
    const bool full = seg_end == theta && seg_start == sched.theta(k - 1);
    const std::int64_t steps = step_count(full ? sched.gap(k - 1) : seg_end - seg_start, step);
    const double h = (seg_end - seg_start) / static_cast<double>(steps);
    const auto deriv = make_deriv(0.5 * (seg_start + seg_end));
    double t = seg_start;
    for (std::int64_t j = 0; j < steps; ++j) {
      const double t_next =
          j + 1 == steps ? seg_end : seg_start + static_cast<double>(j + 1) * h;
      try {
        rk4(deriv, t, std::span<const double>(x), t_next - t, std::span<double>(next), work);
      } catch (const EvalError& e) {
        throw NumericError("integrate: right-hand side failed after t = " + fmt(t) + ": " + e.what());
      }
      if (!all_finite(next))
        throw NumericError("integrate: state became non-finite after t = " + fmt(t));
      x.swap(next);
      t = t_next;
      on_node(t, std::span<const double>(x));
    }
    if (seg_end == theta && theta < t1) {
      try {
        apply_jump(k, std::span<const double>(x), std::span<double>(next));
      } catch (const EvalError& e) {
        throw NumericError("integrate: jump failed at t = " + fmt(theta) + ": " + e.what());
      }
      if (!all_finite(next))
        throw NumericError("integrate: jump produced a non-finite state at t = " + fmt(theta));
      x.swap(next);
      on_jump(k, std::span<const double>(x));
      ++k;
    }
    seg_start = seg_end;
  }
}

}  // namespace

// ---------------------------------------------------------------- Trajectory

std::span<const double> Trajectory::state_after(std::size_t i) const {
  const int j = jump_of_node_[i];
  if (j >= 0) return jumps_[static_cast<std::size_t>(j)].right;
  return state(i);
}

std::size_t Trajectory::locate(double t) const {
  if (times_.empty() || t < times_.front()) throw DomainError("trajectory: time before start");
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

void Trajectory::push(double t, std::span<const double> x) {
  if (x.size() != dim_) throw DomainError("trajectory: state has the wrong dimension");
  if (!times_.empty() && !(t > times_.back()))
    throw DomainError("trajectory: sample times must increase strictly");
  times_.push_back(t);
  states_.insert(states_.end(), x.begin(), x.end());
  jump_of_node_.push_back(-1);
}

void Trajectory::mark_jump(std::int64_t k, std::span<const double> right) {
  if (times_.empty()) throw DomainError("trajectory: no node to attach a jump to");
  const std::size_t node = times_.size() - 1;
  Jump j;
  j.k = k;
  j.theta = times_.back();
  const auto left = state(node);
  j.left.assign(left.begin(), left.end());
  j.right.assign(right.begin(), right.end());
  j.node = node;
  jump_of_node_[node] = static_cast<int>(jumps_.size());
  jumps_.push_back(std::move(j));
}

// ---------------------------------------------------------------- integrate

Trajectory integrate(const QuasilinearImpulsiveSystem& sys, double t0, std::span<const double> x0,
                     double t1, double step) {
  const std::size_t m = sys.dim();
  if (x0.size() != m)
    throw DomainError("integrate: initial state needs " + std::to_string(m) + " components");
  Trajectory traj(m);
  traj.meta.step = step;
  traj.meta.system_fingerprint = sys.fingerprint();
  traj.meta.extension_policy = sys.perturbation().extension_policy();
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> g(m);
  drive(
      sys.schedule(), t0, t1, step, x,
      [&](double t_mid) {
        const auto gv = sys.g(t_mid);
        std::copy(gv.begin(), gv.end(), g.begin());
        return SystemDeriv{sys, std::span<const double>(g)};
      },
      [&](std::int64_t, std::span<const double> xl, std::span<double> out) { sys.jump(xl, out); },
      [&](double t, std::span<const double> xs) { traj.push(t, xs); },
      [&](std::int64_t k, std::span<const double> right) { traj.mark_jump(k, right); });
  return traj;
}

Vector evaluate(const Trajectory& traj, const QuasilinearImpulsiveSystem& sys, double t,
                Side side) {
  if (traj.empty() || t < traj.t_begin() || t > traj.t_end())
    throw DomainError("evaluate: t = " + fmt(t) + " outside the trajectory [" +
                      fmt(traj.empty() ? 0 : traj.t_begin()) + ", " +
                      fmt(traj.empty() ? 0 : traj.t_end()) + "]");
  const std::size_t i = traj.locate(t);
  if (traj.time(i) == t) {
    const auto v = side == Side::Right ? traj.state_after(i) : traj.state(i);
    return Vector(v.begin(), v.end());
  }
  const auto x = traj.state_after(i);
  Vector out(traj.dim());
  Rk4Work work(traj.dim());
  const auto g = sys.g(t);
  rk4(SystemDeriv{sys, g}, traj.time(i), x, t - traj.time(i), std::span<double>(out), work);
  return out;
}

Trajectory trim_front(const Trajectory& traj, const QuasilinearImpulsiveSystem& sys,
                      double t_start) {
  const std::size_t i = traj.locate(t_start);
  Trajectory out(traj.dim());
  out.meta = traj.meta;
  std::size_t from = i;
  if (traj.time(i) != t_start) {
    out.push(t_start, evaluate(traj, sys, t_start));
    from = i + 1;
  }
  for (std::size_t j = from; j < traj.size(); ++j) {
    out.push(traj.time(j), traj.state(j));
    const int jj = traj.jump_at(j);
    if (jj >= 0) {
      const Jump& jump = traj.jumps()[static_cast<std::size_t>(jj)];
      out.mark_jump(jump.k, jump.right);
    }
  }
  return out;
}

// ----------------------------------------------------------- bounded solution

double transient_length(const SystemConstants& consts, const QuasilinearImpulsiveSystem& sys,
                        double tol) {
  if (!(tol > 0)) throw DomainError("bounded solution: tol must be positive");
  const DerivedConstants d = compute_derived_constants(consts, sys, std::nullopt);
  const double C = 2 * d.M_phi * consts.N * std::pow(1 + consts.N * consts.L_h, sys.schedule().p());
  const double T = std::log(C / tol) / d.gamma;
  const double omega = sys.schedule().omega();
  const double periods = std::max(1.0, std::ceil(T / omega));
  return periods * omega;
}

Trajectory bounded_solution(const QuasilinearImpulsiveSystem& sys, const SystemConstants& consts,
                            double t_start, double t_end, double tol, const BoundedOptions& opt) {
  if (!(t_end > t_start)) throw DomainError("bounded solution: requires t_end > t_start");
  if (!(tol > 0)) throw DomainError("bounded solution: tol must be positive");
  const HypothesisReport rep = check_hypotheses(sys, consts);
  std::string failed;
  for (const char* id : {"A1", "A2", "A3", "A4", "A5", "A6"})
    if (!rep.get(id).holds) failed += failed.empty() ? id : std::string(", ") + id;
  if (!failed.empty()) throw HypothesisError("bounded solution requires (A1)-(A6); failed: " + failed);

  const auto& sched = sys.schedule();
  const double omega = sched.omega();
  const double T = opt.transient_override ? *opt.transient_override : transient_length(consts, sys, tol);
  if (!(T > 0)) throw DomainError("bounded solution: transient length must be positive");
  const auto periods = static_cast<std::int64_t>(std::ceil(T / omega - 1e-9));
  const std::int64_t block = sched.block_index(t_start);
  const double start = sched.theta((block - periods) * sched.p());
  const double step = opt.step > 0 ? opt.step : omega / 2000;

  const Vector zero(sys.dim(), 0.0);
  Trajectory full = integrate(sys, start, zero, t_end, step);
  Trajectory out = trim_front(full, sys, t_start);
  out.meta.t_transient = static_cast<double>(periods) * omega;
  out.meta.tol = tol;
  out.meta.start_convention = "integrated from zero state at t = " + fmt(start);
  return out;
}

// ------------------------------------------------------------------ residual

double residual_tail_length(const SystemConstants& consts, const QuasilinearImpulsiveSystem& sys,
                            double tol) {
  if (!(tol > 0)) throw DomainError("residual: tol must be positive");
  const double lam = consts.lambda;
  const double K = consts.N * ((consts.M_f + consts.M_sigma) / lam +
                               sys.schedule().p() * consts.M_h /
                                   (1 - std::exp(-lam * sys.schedule().omega())));
  return std::max(0.0, std::log(K / tol) / lam);
}

double integral_equation_residual(const Trajectory& traj, const QuasilinearImpulsiveSystem& sys,
                                  std::span<const double> sample_times, double T_tail,
                                  double quad_tol) {
  if (!(T_tail > 0)) throw DomainError("residual: tail length must be positive");
  const auto& sched = sys.schedule();
  const std::size_t m = sys.dim();
  double worst = 0;
  for (double t : sample_times) {
    const double lo = t - T_tail;
    if (traj.empty() || lo < traj.t_begin() || t > traj.t_end())
      throw DomainError("residual: trajectory does not cover [" + fmt(lo) + ", " + fmt(t) + "]");

    std::vector<double> c{lo};
    for (auto k = sched.first_index_after(lo, true); sched.theta(k) < t; ++k)
      c.push_back(sched.theta(k));
    c.push_back(t);
    const std::size_t n_imp = c.size() - 2;

    Vector rhs(m, 0.0);
    std::vector<double> fx(m);
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
      const double a = c[i], b = c[i + 1];
      if (!(b > a)) continue;
      const Matrix jp = power(sys.jump_matrix(), static_cast<long long>(n_imp - i));
      const auto gv = sys.g(0.5 * (a + b));
      const Vector g(gv.begin(), gv.end());
      auto integrand = [&](double s) {
        const Vector phi = evaluate(traj, sys, s, s == a ? Side::Right : Side::Left);
        sys.eval_f(s, phi, fx);
        for (std::size_t j = 0; j < m; ++j) fx[j] += g[j];
        return (mat_exp(sys.A() * (t - s)) * jp).apply(fx);
      };
      const Vector part = adaptive_simpson_vec(integrand, a, b, quad_tol);
      for (std::size_t j = 0; j < m; ++j) rhs[j] += part[j];
    }
    for (std::size_t i = 1; i <= n_imp; ++i) {
      const double theta = c[i];
      const Vector phi = evaluate(traj, sys, theta, Side::Left);
      Vector hx(m);
      sys.eval_h(phi, hx);
      const Matrix U = mat_exp(sys.A() * (t - theta)) *
                       power(sys.jump_matrix(), static_cast<long long>(n_imp - i));
      const Vector part = U.apply(hx);
      for (std::size_t j = 0; j < m; ++j) rhs[j] += part[j];
    }
    worst = std::max(worst, dist2(evaluate(traj, sys, t, Side::Left), rhs));
  }
  return worst;
}

// ----------------------------------------------------------------- stability

StabilityResult stability_probe(const QuasilinearImpulsiveSystem& sys, std::span<const double> x0_a,
                                std::span<const double> x0_b, double t0, double t1,
                                const StabilityOptions& opt) {
  const std::size_t m = sys.dim();
  if (x0_a.size() != m || x0_b.size() != m)
    throw DomainError("stability probe: initial states need " + std::to_string(m) + " components");
  StabilityResult res;
  res.fit_begin = opt.fit_begin ? *opt.fit_begin : t0 + (t1 - t0) / 4;
  res.fit_end = opt.fit_end ? *opt.fit_end : t1;
  if (std::equal(x0_a.begin(), x0_a.end(), x0_b.begin())) {
    res.degenerate = true;
    return res;
  }
  if (!(res.fit_end > res.fit_begin) || res.fit_begin < t0 || res.fit_end > t1)
    throw DomainError("stability probe: fit window must lie inside [t0, t1]");

  // Joint state (x_a, e) with e = x_b − x_a.
  std::vector<double> z(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    z[i] = x0_a[i];
    z[m + i] = x0_b[i] - x0_a[i];
  }
  std::vector<double> g(m), xb(m), fa(m), fb(m), ha(m), hb(m);
  std::vector<double> ts, ys;
  const Matrix& A = sys.A();
  auto make_deriv = [&](double t_mid) {
    const auto gv = sys.g(t_mid);
    std::copy(gv.begin(), gv.end(), g.begin());
    return [&](double t, std::span<const double> zz, std::span<double> dz) {
      const auto xa = zz.subspan(0, m), e = zz.subspan(m, m);
      for (std::size_t i = 0; i < m; ++i) xb[i] = xa[i] + e[i];
      sys.eval_f(t, xa, fa);
      sys.eval_f(t, xb, fb);
      for (std::size_t i = 0; i < m; ++i) {
        double ax = 0, ae = 0;
        for (std::size_t j = 0; j < m; ++j) {
          ax += A(i, j) * xa[j];
          ae += A(i, j) * e[j];
        }
        dz[i] = ax + fa[i] + g[i];
        dz[m + i] = ae + (fb[i] - fa[i]);
      }
    };
  };
  auto apply_jump = [&](std::int64_t, std::span<const double> zz, std::span<double> out) {
    const auto xa = zz.subspan(0, m), e = zz.subspan(m, m);
    for (std::size_t i = 0; i < m; ++i) xb[i] = xa[i] + e[i];
    sys.eval_h(xa, ha);
    sys.eval_h(xb, hb);
    const Matrix& J = sys.jump_matrix();
    for (std::size_t i = 0; i < m; ++i) {
      double jx = 0, je = 0;
      for (std::size_t j = 0; j < m; ++j) {
        jx += J(i, j) * xa[j];
        je += J(i, j) * e[j];
      }
      out[i] = jx + ha[i];
      out[m + i] = je + (hb[i] - ha[i]);
    }
  };
  auto on_node = [&](double t, std::span<const double> zz) {
    if (res.underflow || t < res.fit_begin || t > res.fit_end) return;
    const double d = norm2(zz.subspan(m, m));
    if (!(d >= std::numeric_limits<double>::min())) {
      res.underflow = true;
      return;
    }
    ts.push_back(t);
    ys.push_back(std::log(d));
  };
  const double step = opt.step > 0 ? opt.step : sys.schedule().omega() / 2000;
  drive(sys.schedule(), t0, t1, step, z, make_deriv, apply_jump, on_node,
        [](std::int64_t, std::span<const double>) {});

  res.samples = ts.size();
  if (ts.size() < 2) throw DomainError("stability probe: fewer than two samples in the fit window");
  double tm = 0, ym = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tm += ts[i];
    ym += ys[i];
  }
  tm /= static_cast<double>(ts.size());
  ym /= static_cast<double>(ts.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sxy += (ts[i] - tm) * (ys[i] - ym);
    sxx += (ts[i] - tm) * (ts[i] - tm);
  }
  res.slope = sxy / sxx;
  return res;
}

// ------------------------------------------------------------------ measures

double sup_norm(const Trajectory& traj) {
  double best = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) best = std::max(best, norm2(traj.state(i)));
  for (const auto& j : traj.jumps()) best = std::max(best, norm2(j.right));
  return best;
}

double max_interior_slope(const Trajectory& traj) {
  double best = 0;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i)
    best = std::max(best, dist2(traj.state(i + 1), traj.state_after(i)) /
                              (traj.time(i + 1) - traj.time(i)));
  return best;
}

double max_jump_law_error(const Trajectory& traj, const QuasilinearImpulsiveSystem& sys) {
  double worst = 0;
  Vector expect(sys.dim());
  for (const auto& j : traj.jumps()) {
    sys.jump(j.left, expect);
    worst = std::max(worst, dist2(j.right, expect));
  }
  return worst;
}

}  // namespace impulsive
