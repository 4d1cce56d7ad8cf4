#pragma once

// Adaptive Simpson quadrature with Richardson correction, scalar and vector
// valued. `tol` is an absolute tolerance on the whole interval.

#include <algorithm>
#include <cmath>
#include <vector>

namespace impulsive {

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth, int min_depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || (min_depth <= 0 && std::abs(delta) <= 15 * tol))
    return left + right + delta / 15;
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1, min_depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1, min_depth - 1);
}

inline double max_abs(const std::vector<double>& v) {
  double r = 0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

template <class F>
std::vector<double> simpson_step_vec(const F& f, double a, double b,
                                     const std::vector<double>& fa, const std::vector<double>& fm,
                                     const std::vector<double>& fb,
                                     const std::vector<double>& whole, double tol, int depth,
                                     int min_depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const std::vector<double> flm = f(lm), frm = f(rm);
  const std::size_t n = fa.size();
  std::vector<double> left(n), right(n), delta(n);
  for (std::size_t i = 0; i < n; ++i) {
    left[i] = (m - a) / 6 * (fa[i] + 4 * flm[i] + fm[i]);
    right[i] = (b - m) / 6 * (fm[i] + 4 * frm[i] + fb[i]);
    delta[i] = left[i] + right[i] - whole[i];
  }
  if (depth <= 0 || (min_depth <= 0 && max_abs(delta) <= 15 * tol)) {
    for (std::size_t i = 0; i < n; ++i) left[i] += right[i] + delta[i] / 15;
    return left;
  }
  std::vector<double> out =
      simpson_step_vec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1, min_depth - 1);
  const std::vector<double> r =
      simpson_step_vec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1, min_depth - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] += r[i];
  return out;
}

}  // namespace detail

/// ∫_a^b f. Splits at least `min_depth` times before trusting the error
/// estimate.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 40,
                        int min_depth = 3) {
  if (b == a) return 0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth, min_depth);
}

/// Vector-valued version; F returns std::vector<double> of fixed size.
template <class F>
std::vector<double> adaptive_simpson_vec(const F& f, double a, double b, double tol,
                                         int max_depth = 40, int min_depth = 3) {
  const std::vector<double> fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  if (b == a) return std::vector<double>(fa.size(), 0.0);
  std::vector<double> whole(fa.size());
  for (std::size_t i = 0; i < fa.size(); ++i) whole[i] = (b - a) / 6 * (fa[i] + 4 * fm[i] + fb[i]);
  return detail::simpson_step_vec(f, a, b, fa, fm, fb, whole, tol, max_depth, min_depth);
}

}  // namespace impulsive
