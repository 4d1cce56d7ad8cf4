#include "impulsive/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>

#include "impulsive/errors.hpp"

namespace impulsive {

namespace {

// Runs fn(i) for i in [0, n) on the OpenMP team and rethrows the first
// exception afterwards.
template <class F>
void parallel_for_each(std::size_t n, const F& fn) {
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
#pragma omp critical(impulsive_diagnostics_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::pair<std::int64_t, std::int64_t> witness_window(const ImpulseSchedule& sched, double a,
                                                     double b, int J) {
  if (!(b > a)) throw DomainError("witness window: requires b > a");
  if (J < 0) throw DomainError("witness window: warm-up periods must be non-negative");
  const std::int64_t p = sched.p();
  std::int64_t alpha = sched.block_index(a);
  if (sched.theta((alpha + 1) * p) == a) ++alpha;
  const std::int64_t beta = sched.block_index(b) + 1;
  return {alpha - J, beta - alpha + J};
}

double shift_time(const ImpulseSchedule& sched, double t, std::int64_t zeta) {
  if (zeta == 0) return t;
  const std::int64_t shift = zeta * sched.p();
  const std::int64_t k = sched.first_index_after(t, false);
  const double after = sched.theta(k) - t;
  const double before = t - sched.theta(k - 1);
  if (after <= before) return sched.theta(k + shift) - after;
  return sched.theta(k - 1 + shift) + before;
}

double ShiftedSolutions::difference(const QuasilinearImpulsiveSystem& sys, std::size_t i, double t,
                                    Side side) const {
  const Vector x = evaluate(base, sys, t, side);
  const Vector y = evaluate(shifted[i], sys, shift_time(sys.schedule(), t, zetas[i]), side);
  return dist2(x, y);
}

ShiftedSolutions compute_shifted_solutions(const QuasilinearImpulsiveSystem& sys,
                                           const SystemConstants& consts,
                                           std::vector<std::int64_t> zetas, double begin,
                                           double end, double tol, double step) {
  ShiftedSolutions ctx;
  ctx.begin = begin;
  ctx.end = end;
  ctx.tol = tol;
  BoundedOptions opt;
  opt.step = step;
  ctx.base = bounded_solution(sys, consts, begin, end, tol, opt);
  ctx.zetas = std::move(zetas);
  ctx.shifted.resize(ctx.zetas.size());
  const auto& sched = sys.schedule();
  parallel_for_each(ctx.zetas.size(), [&](std::size_t i) {
    const std::int64_t z = ctx.zetas[i];
    if (z < 0) throw DomainError("shifted solutions: shifts must be non-negative");
    if (z == 0) {
      ctx.shifted[i] = ctx.base;
      return;
    }
    const double lo = shift_time(sched, begin, z);
    const double hi = shift_time(sched, end, z);
    const double slack = 1e-6 + 1e-12 * std::abs(hi);
    try {
      ctx.shifted[i] = bounded_solution(sys, consts, lo - slack, hi + slack, tol, opt);
    } catch (const DomainError& e) {
      throw DomainError("shift " + std::to_string(z) + " needs forcing beyond the stored orbit (" +
                        e.what() + ")");
    }
  });
  return ctx;
}

ShiftConvergenceReport shift_convergence(const QuasilinearImpulsiveSystem& sys,
                                         const DerivedConstants& derived,
                                         const ShiftedSolutions& ctx, double a, double b, int J) {
  if (a < ctx.begin || b > ctx.end)
    throw DomainError("shift convergence: compact outside the computed trajectories");
  ShiftConvergenceReport rep;
  rep.a = a;
  rep.b = b;
  rep.J = J;
  rep.K1 = derived.K1;
  rep.K2 = derived.K2;
  rep.gamma = derived.gamma;
  std::tie(rep.window_start, rep.window_len) = witness_window(sys.schedule(), a, b, J);
  const double omega = sys.schedule().omega();
  const double transient = derived.K1 * std::exp(-derived.gamma * omega * J);

  rep.entries.resize(ctx.zetas.size());
  const auto& base = ctx.base;
  parallel_for_each(ctx.zetas.size(), [&](std::size_t i) {
    ShiftConvergenceEntry& e = rep.entries[i];
    e.zeta = ctx.zetas[i];
    e.mu = omega * static_cast<double>(e.zeta);
    e.score = e.zeta == 0 ? 0.0
                          : convergence_score(sys.perturbation(), e.zeta, rep.window_start,
                                              rep.window_start + rep.window_len);
    double sup = std::max(ctx.difference(sys, i, a), ctx.difference(sys, i, b));
    for (std::size_t j = base.locate(a); j < base.size() && base.time(j) <= b; ++j) {
      const double t = base.time(j);
      if (t < a) continue;
      sup = std::max(sup, ctx.difference(sys, i, t, Side::Left));
      if (base.jump_at(j) >= 0) sup = std::max(sup, ctx.difference(sys, i, t, Side::Right));
    }
    e.sup_diff = sup;
    e.cap = transient + derived.K2 * e.score;
    e.exceeds = e.sup_diff > e.cap;
  });

  for (const auto& e : rep.entries) rep.any_exceeds = rep.any_exceeds || e.exceeds;
  if (!rep.entries.empty()) {
    const auto best = std::min_element(
        rep.entries.begin(), rep.entries.end(),
        [](const auto& x, const auto& y) { return x.score < y.score; });
    rep.best_is_smallest = std::all_of(rep.entries.begin(), rep.entries.end(), [&](const auto& e) {
      return best->sup_diff <= e.sup_diff;
    });
  }
  return rep;
}

std::size_t SeparationReport::found_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.found; }));
}

SeparationReport separation_scan(const QuasilinearImpulsiveSystem& sys,
                                 const DerivedConstants& derived,
                                 const std::vector<Witness>& witnesses,
                                 const ShiftedSolutions& ctx, std::optional<double> sample_step,
                                 std::optional<double> epsilon_override) {
  if (!derived.r || !derived.epsilon_0)
    throw DomainError("separation scan: derived constants lack r and epsilon_0 (delta0 unknown)");
  if (witnesses.size() != ctx.zetas.size())
    throw DomainError("separation scan: witnesses do not match the shifted solutions");
  SeparationReport rep;
  rep.r = *derived.r;
  rep.epsilon_0 = epsilon_override ? *epsilon_override : *derived.epsilon_0;
  rep.sample_step = sample_step ? *sample_step : rep.r / 50;
  if (!(rep.epsilon_0 > 0)) throw DomainError("separation scan: epsilon_0 must be positive");
  if (!(rep.r > rep.sample_step) || !(rep.sample_step > 0))
    throw DomainError("separation scan: r must exceed the sample step");

  const auto& sched = sys.schedule();
  const std::int64_t p = sched.p();
  const double r = rep.r;
  rep.entries.resize(witnesses.size());
  parallel_for_each(witnesses.size(), [&](std::size_t n) {
    const Witness& w = witnesses[n];
    if (w.zeta != ctx.zetas[n])
      throw DomainError("separation scan: witness order differs from the shifted solutions");
    SeparationEntry& e = rep.entries[n];
    e.zeta = w.zeta;
    e.eta = w.eta;
    e.mu = sched.omega() * static_cast<double>(w.zeta);
    const double first = sched.theta(w.eta * p), last = sched.theta((w.eta + 1) * p);
    e.scan_begin = first - r;
    e.scan_end = last + r;
    if (e.scan_begin < ctx.begin || e.scan_end > ctx.end)
      throw DomainError("separation scan: scan range outside the computed trajectory");

    // Coarse pass at base nodes.
    std::vector<std::pair<double, double>> coarse;  // (difference, t)
    const auto& base = ctx.base;
    for (std::size_t j = base.locate(e.scan_begin); j < base.size() && base.time(j) <= e.scan_end;
         ++j) {
      const double t = base.time(j);
      if (t < e.scan_begin) continue;
      double d = ctx.difference(sys, n, t, Side::Left);
      if (base.jump_at(j) >= 0) d = std::max(d, ctx.difference(sys, n, t, Side::Right));
      coarse.emplace_back(d, t);
      e.coarse_max = std::max(e.coarse_max, d);
    }
    std::sort(coarse.begin(), coarse.end(), std::greater<>());

    std::vector<double> centres;
    for (std::size_t j = 0; j < coarse.size() && j < 8; ++j) centres.push_back(coarse[j].second);
    std::vector<double> impulses;
    for (std::int64_t k = w.eta * p; k <= (w.eta + 1) * p; ++k) {
      const double th = sched.theta(k);
      impulses.push_back(th);
      for (double c : {th, th - 1.01 * r, th + 1.01 * r}) centres.push_back(c);
    }

    const auto steps = static_cast<std::int64_t>(std::ceil(2 * r / rep.sample_step));
    double best = -1;
    for (double c : centres) {
      const double tau = std::clamp(c, first, last);
      double inf = std::numeric_limits<double>::infinity();
      for (std::int64_t j = 0; j <= steps; ++j) {
        const double t = j == steps ? tau + r : tau - r + static_cast<double>(j) * rep.sample_step;
        inf = std::min(inf, ctx.difference(sys, n, t, Side::Left));
      }
      for (double th : impulses)
        if (th >= tau - r && th <= tau + r)
          inf = std::min({inf, ctx.difference(sys, n, th, Side::Left),
                          ctx.difference(sys, n, th, Side::Right)});
      if (inf > best) {
        best = inf;
        e.tau = tau;
        e.inf_diff = inf;
      }
    }
    e.found = e.inf_diff >= rep.epsilon_0;
  });
  return rep;
}

double periodicity_defect(const Trajectory& traj, double period,
                          std::optional<std::pair<double, double>> range) {
  if (!(period > 0)) throw DomainError("periodicity defect: period must be positive");
  if (traj.empty()) throw DomainError("periodicity defect: empty trajectory");
  const double a = range ? range->first : traj.t_begin();
  const double b = range ? range->second : traj.t_end();
  if (a < traj.t_begin() || b > traj.t_end())
    throw DomainError("periodicity defect: range outside the trajectory");
  if (b - a < 2 * period) throw DomainError("periodicity defect: range shorter than two periods");

  const auto& times = traj.times();
  auto value_at = [&](double t, bool right) -> Vector {
    const std::size_t j = traj.locate(t);
    const double tol = Tolerances::kPeriodicity * std::max(1.0, std::abs(t));
    std::size_t hit = j;
    bool exact = std::abs(times[j] - t) <= tol;
    if (!exact && j + 1 < times.size() && std::abs(times[j + 1] - t) <= tol) {
      hit = j + 1;
      exact = true;
    }
    if (exact) {
      const auto v = right ? traj.state_after(hit) : traj.state(hit);
      return Vector(v.begin(), v.end());
    }
    const auto x0 = traj.state_after(j);
    const auto x1 = traj.state(j + 1);
    const double w = (t - times[j]) / (times[j + 1] - times[j]);
    Vector out(traj.dim());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1 - w) * x0[i] + w * x1[i];
    return out;
  };

  double worst = 0;
  for (std::size_t i = traj.locate(a); i < traj.size(); ++i) {
    const double t = times[i];
    if (t < a) continue;
    if (t + period > b) break;
    worst = std::max(worst, dist2(traj.state(i), value_at(t + period, false)));
    if (traj.jump_at(i) >= 0)
      worst = std::max(worst, dist2(traj.state_after(i), value_at(t + period, true)));
  }
  return worst;
}

}  // namespace impulsive
