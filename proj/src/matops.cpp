#include "impulsive/matops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <utility>

#include "impulsive/errors.hpp"

namespace impulsive {

namespace {

void require_square_finite(const Matrix& m, const char* op) {
  if (m.empty()) throw DomainError(std::string(op) + ": empty matrix");
  if (m.dim() > Tolerances::kMaxDim)
    throw DomainError(std::string(op) + ": dimension exceeds " +
                      std::to_string(Tolerances::kMaxDim));
  if (!m.all_finite()) throw DomainError(std::string(op) + ": non-finite entry");
}

void require_same_dim(const Matrix& a, const Matrix& b) {
  if (a.dim() != b.dim()) throw DomainError("matrix dimension mismatch");
}

// LU factorization with partial pivoting, in place. Returns false when a
// pivot falls below `pivot_floor`.
template <typename T>
bool lu_factor(std::vector<T>& a, std::size_t n, std::vector<std::size_t>& perm,
               double pivot_floor, int* sign = nullptr) {
  perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  int s = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a[k * n + k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(a[i * n + k]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (!(best > pivot_floor)) return false;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
      std::swap(perm[k], perm[piv]);
      s = -s;
    }
    const T inv = T(1) / a[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const T l = a[i * n + k] * inv;
      a[i * n + k] = l;
      if (l == T(0)) continue;
      for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= l * a[k * n + j];
    }
  }
  if (sign) *sign = s;
  return true;
}

// Solves LU X = P B for a square right-hand side B (row-major, n x n).
template <typename T>
std::vector<T> lu_solve(const std::vector<T>& lu, std::size_t n,
                        const std::vector<std::size_t>& perm, const std::vector<T>& b) {
  std::vector<T> x(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) x[i * n + j] = b[perm[i] * n + j];
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      T s = x[i * n + c];
      for (std::size_t k = 0; k < i; ++k) s -= lu[i * n + k] * x[k * n + c];
      x[i * n + c] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      T s = x[ii * n + c];
      for (std::size_t k = ii + 1; k < n; ++k) s -= lu[ii * n + k] * x[k * n + c];
      x[ii * n + c] = s / lu[ii * n + ii];
    }
  }
  return x;
}

// Small complex matrix used only by the eigenvector and logarithm paths.
struct CMatrix {
  std::size_t n = 0;
  std::vector<Complex> a;
  explicit CMatrix(std::size_t dim) : n(dim), a(dim * dim) {}
  Complex& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  Complex operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

CMatrix cmul(const CMatrix& x, const CMatrix& y) {
  CMatrix r(x.n);
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t k = 0; k < x.n; ++k) {
      const Complex v = x(i, k);
      if (v == Complex(0)) continue;
      for (std::size_t j = 0; j < x.n; ++j) r(i, j) += v * y(k, j);
    }
  return r;
}

double cnorm_fro(const CMatrix& x) {
  double s = 0;
  for (const auto& v : x.a) s += std::norm(v);
  return std::sqrt(s);
}

// Padé coefficients b_0..b_m for the diagonal [m/m] approximant of e^x.
constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                           302702400.0,   30270240.0,   2162160.0,
                                           110880.0,      3960.0,       90.0,
                                           1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};
// Backward-error thresholds on ‖M‖₁ for each degree (double precision).
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

// Returns R = (V - U)^{-1} (V + U).
Matrix pade_ratio(const Matrix& u, const Matrix& v) {
  const std::size_t n = u.dim();
  Matrix den = v - u;
  Matrix num = v + u;
  std::vector<double> lu(den.data().begin(), den.data().end());
  std::vector<std::size_t> perm;
  if (!lu_factor(lu, n, perm, 0.0))
    throw NumericError("matrix exponential: singular Padé denominator");
  std::vector<double> rhs(num.data().begin(), num.data().end());
  return Matrix(n, lu_solve(lu, n, perm, rhs));
}

template <std::size_t K>
Matrix pade_low(const Matrix& a, const std::array<double, K>& b) {
  const std::size_t n = a.dim();
  const Matrix id = Matrix::identity(n);
  const Matrix a2 = a * a;
  Matrix odd = id * b[1];
  Matrix even = id * b[0];
  Matrix p = id;
  for (std::size_t j = 1; 2 * j < K; ++j) {
    p = p * a2;
    if (2 * j + 1 < K) odd += p * b[2 * j + 1];
    even += p * b[2 * j];
  }
  return pade_ratio(a * odd, even);
}

Matrix pade13(const Matrix& a) {
  const auto& b = kPade13;
  const std::size_t n = a.dim();
  const Matrix id = Matrix::identity(n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  Matrix u = a6 * (a6 * b[13] + a4 * b[11] + a2 * b[9]) + a6 * b[7] + a4 * b[5] +
             a2 * b[3] + id * b[1];
  u = a * u;
  const Matrix v = a6 * (a6 * b[12] + a4 * b[10] + a2 * b[8]) + a6 * b[6] + a4 * b[4] +
                   a2 * b[2] + id * b[0];
  return pade_ratio(u, v);
}

bool is_positive_scalar_identity(const Matrix& m, double* c) {
  const std::size_t n = m.dim();
  const double d = m(0, 0);
  if (!(d > 0)) return false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (m(i, j) != (i == j ? d : 0.0)) return false;
  *c = d;
  return true;
}

// Inverse scaling and squaring: repeated Denman–Beavers square roots until
// the argument is close to I, then the atanh series.
Matrix log_inverse_scaling_squaring(const Matrix& m) {
  const std::size_t n = m.dim();
  const Matrix id = Matrix::identity(n);
  Matrix x = m;
  int roots = 0;
  while (norm_1(x - id) > 0.25) {
    if (roots > 60) throw NumericError("no principal logarithm: square roots did not converge");
    Matrix y = x;
    Matrix z = id;
    for (int it = 0; it < 100; ++it) {
      const Matrix yi = inverse(y);
      const Matrix zi = inverse(z);
      Matrix yn = (y + zi) * 0.5;
      Matrix zn = (z + yi) * 0.5;
      const double change = norm_1(yn - y);
      y = std::move(yn);
      z = std::move(zn);
      if (change <= 1e-15 * norm_1(y)) break;
    }
    if (!y.all_finite()) throw NumericError("no principal logarithm");
    x = std::move(y);
    ++roots;
  }
  // log(X) = 2 atanh(Z), Z = (X - I)(X + I)^{-1}.
  const Matrix z = (x - id) * inverse(x + id);
  const Matrix z2 = z * z;
  Matrix term = z;
  Matrix sum = z;
  for (int k = 1; k < 200; ++k) {
    term = term * z2;
    const Matrix add = term * (1.0 / (2.0 * k + 1.0));
    sum += add;
    if (norm_1(add) <= 1e-18 * std::max(1.0, norm_1(sum))) break;
  }
  return sum * (2.0 * std::ldexp(1.0, roots));
}

void hessenberg_reduce(std::vector<double>& a, std::size_t n) {
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += a[i * n + k] * a[i * n + k];
    alpha = std::sqrt(alpha);
    if (alpha == 0) continue;
    if (a[(k + 1) * n + k] > 0) alpha = -alpha;
    std::vector<double> v(n, 0.0);
    for (std::size_t i = k + 1; i < n; ++i) v[i] = a[i * n + k];
    v[k + 1] -= alpha;
    double vn = 0;
    for (std::size_t i = k + 1; i < n; ++i) vn += v[i] * v[i];
    if (vn == 0) continue;
    // A <- H A, H = I - 2 v vᵀ / (vᵀv)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * a[i * n + j];
      s *= 2.0 / vn;
      for (std::size_t i = k + 1; i < n; ++i) a[i * n + j] -= s * v[i];
    }
    // A <- A H
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = k + 1; j < n; ++j) s += a[i * n + j] * v[j];
      s *= 2.0 / vn;
      for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= s * v[j];
    }
    for (std::size_t i = k + 2; i < n; ++i) a[i * n + k] = 0.0;
  }
}

// Francis double-shift QR on an upper Hessenberg matrix (EISPACK hqr
// structure). Eigenvalues only.
void hessenberg_qr(std::vector<double>& h, int n, std::vector<double>& wr,
                   std::vector<double>& wi) {
  auto a = [&](int i, int j) -> double& { return h[static_cast<std::size_t>(i * n + j)]; };
  const auto sign = [](double x, double y) { return y >= 0 ? std::abs(x) : -std::abs(x); };
  wr.assign(n, 0.0);
  wi.assign(n, 0.0);
  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));

  int nn = n - 1;
  int total = 0;
  double t = 0.0;
  double p = 0, q = 0, r = 0, s = 0, w = 0, x = 0, y = 0, z = 0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l > 0; --l) {
        s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= Tolerances::kQrDeflation * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn] = 0.0;
        --nn;
      } else {
        y = a(nn - 1, nn - 1);
        w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn - 1] = -z;
            wi[nn] = z;
          }
          nn -= 2;
        } else {
          if (++total > Tolerances::kQrIterationCap)
            throw NumericError("eigenvalues: QR iteration did not converge");
          if (its > 0 && its % 10 == 0) {
            // exceptional shift
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v =
                std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= std::numeric_limits<double>::epsilon() * v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            s = sign(std::sqrt(p * p + q * q + r * r), p);
            if (s != 0.0) {
              if (k == m) {
                if (l != m) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a(k, j) + q * a(k + 1, j);
                if (k != nn - 1) {
                  p += r * a(k + 2, j);
                  a(k + 2, j) -= p * z;
                }
                a(k + 1, j) -= p * y;
                a(k, j) -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a(i, k) + y * a(i, k + 1);
                if (k != nn - 1) {
                  p += z * a(i, k + 2);
                  a(i, k + 2) -= p * r;
                }
                a(i, k + 1) -= p * q;
                a(i, k) -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }
}

std::vector<Complex> eigenvalues_2x2(double a, double b, double c, double d) {
  const double mid = 0.5 * (a + d);
  const double half_diff = 0.5 * (a - d);
  const double disc = half_diff * half_diff + b * c;
  if (disc >= 0) {
    const double root = std::sqrt(disc);
    const double l1 = mid >= 0 ? mid + root : mid - root;
    const double det = a * d - b * c;
    const double l2 = l1 != 0.0 ? det / l1 : mid - (mid >= 0 ? root : -root);
    return {Complex(l1, 0.0), Complex(l2, 0.0)};
  }
  const double im = std::sqrt(-disc);
  return {Complex(mid, -im), Complex(mid, im)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

Matrix::Matrix(std::size_t dim, std::vector<double> entries) : dim_(dim), data_(std::move(entries)) {
  if (data_.size() != dim * dim) throw DomainError("Matrix: entry count is not dim*dim");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) : dim_(rows.size()) {
  data_.reserve(dim_ * dim_);
  for (const auto& row : rows) {
    if (row.size() != dim_) throw DomainError("Matrix: rows must form a square");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

Matrix Matrix::identity(std::size_t dim) { return scalar(dim, 1.0); }

Matrix Matrix::scalar(std::size_t dim, double value) {
  Matrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = value;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::trace() const {
  double s = 0;
  for (std::size_t i = 0; i < dim_; ++i) s += (*this)(i, i);
  return s;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Vector Matrix::apply(std::span<const double> x) const {
  Vector out(dim_);
  apply_into(x, out);
  return out;
}

void Matrix::apply_into(std::span<const double> x, std::span<double> out) const {
  if (x.size() != dim_ || out.size() != dim_) throw DomainError("Matrix::apply: size mismatch");
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = 0;
    const double* row = data_.data() + i * dim_;
    for (std::size_t j = 0; j < dim_; ++j) s += row[j] * x[j];
    out[i] = s;
  }
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
  require_same_dim(*this, rhs);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
  require_same_dim(*this, rhs);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

Matrix operator*(const Matrix& lhs, const Matrix& rhs) {
  require_same_dim(lhs, rhs);
  const std::size_t n = lhs.dim_;
  Matrix r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double v = lhs.data_[i * n + k];
      if (v == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) r.data_[i * n + j] += v * rhs.data_[k * n + j];
    }
  return r;
}

// ---------------------------------------------------------------------------
// Norms and elementary operations

double norm_1(const Matrix& m) {
  double best = 0;
  for (std::size_t j = 0; j < m.dim(); ++j) {
    double s = 0;
    for (std::size_t i = 0; i < m.dim(); ++i) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

double norm_inf(const Matrix& m) {
  double best = 0;
  for (std::size_t i = 0; i < m.dim(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < m.dim(); ++j) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

double norm_fro(const Matrix& m) { return norm2(m.data()); }

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_dim(a, b);
  double d = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  return d;
}

static double max_abs_entry(const Matrix& m) {
  double r = 0;
  for (double v : m.data()) r = std::max(r, std::abs(v));
  return r;
}

double spectral_norm(const Matrix& m) {
  if (m.empty()) return 0.0;
  const std::size_t n = m.dim();
  const Matrix s = m.transpose() * m;
  const double scale = max_abs_entry(s);
  if (scale == 0.0) return 0.0;
  // Power iteration on MᵀM, accelerated by repeated squaring: after k
  // squarings the columns of T are (MᵀM)^(2^k) applied to unit vectors, so
  // nearly equal top singular values still separate in a few dozen steps.
  Matrix t = s * (1.0 / scale);
  for (int it = 0; it < 64; ++it) {
    Matrix t2 = t * t;
    const double mx = max_abs_entry(t2);
    if (mx == 0.0) break;
    t2 *= 1.0 / mx;
    const double change = max_abs_diff(t2, t);
    t = std::move(t2);
    if (change <= 1e-15) break;
  }
  std::size_t col = 0;
  double heaviest = -1;
  for (std::size_t j = 0; j < n; ++j) {
    double c = 0;
    for (std::size_t i = 0; i < n; ++i) c += t(i, j) * t(i, j);
    if (c > heaviest) {
      heaviest = c;
      col = j;
    }
  }
  Vector v(n), w(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = t(i, col);
  double rho = 0;
  for (int it = 0; it < 3; ++it) {
    const double vn = norm2(v);
    if (vn == 0.0) return 0.0;
    for (auto& e : v) e /= vn;
    s.apply_into(v, w);
    rho = 0;
    for (std::size_t i = 0; i < n; ++i) rho += v[i] * w[i];
    v.swap(w);
  }
  return std::sqrt(std::max(rho, 0.0));
}

Matrix inverse(const Matrix& m) {
  require_square_finite(m, "inverse");
  const std::size_t n = m.dim();
  std::vector<double> lu(m.data().begin(), m.data().end());
  std::vector<std::size_t> perm;
  const double floor = Tolerances::kSingularPivot * norm_inf(m);
  if (!lu_factor(lu, n, perm, floor)) throw NumericError("singular matrix");
  const Matrix id = Matrix::identity(n);
  std::vector<double> rhs(id.data().begin(), id.data().end());
  return Matrix(n, lu_solve(lu, n, perm, rhs));
}

double determinant(const Matrix& m) {
  require_square_finite(m, "determinant");
  const std::size_t n = m.dim();
  std::vector<double> lu(m.data().begin(), m.data().end());
  std::vector<std::size_t> perm;
  int sgn = 1;
  if (!lu_factor(lu, n, perm, 0.0, &sgn)) return 0.0;
  double d = sgn;
  for (std::size_t i = 0; i < n; ++i) d *= lu[i * n + i];
  return d;
}

Matrix power(const Matrix& m, long long k) {
  Matrix base = k < 0 ? inverse(m) : m;
  unsigned long long e = k < 0 ? static_cast<unsigned long long>(-(k + 1)) + 1ULL
                               : static_cast<unsigned long long>(k);
  Matrix result = Matrix::identity(m.dim());
  while (e > 0) {
    if (e & 1ULL) result = result * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Exponential and logarithm

Matrix mat_exp(const Matrix& m) {
  require_square_finite(m, "mat_exp");
  const double nrm = norm_1(m);
  if (nrm == 0.0) return Matrix::identity(m.dim());
  if (nrm <= kTheta3) return pade_low(m, kPade3);
  if (nrm <= kTheta5) return pade_low(m, kPade5);
  if (nrm <= kTheta7) return pade_low(m, kPade7);
  if (nrm <= kTheta9) return pade_low(m, kPade9);
  int squarings = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / kTheta13))));
  if (squarings > 1000) throw NumericError("matrix exponential overflow");
  Matrix r = pade13(m * std::ldexp(1.0, -squarings));
  for (int i = 0; i < squarings; ++i) {
    r = r * r;
    if (!r.all_finite()) throw NumericError("matrix exponential overflow");
  }
  if (!r.all_finite()) throw NumericError("matrix exponential overflow");
  return r;
}

Matrix mat_log_principal(const Matrix& m) {
  require_square_finite(m, "mat_log_principal");
  const std::size_t n = m.dim();
  const auto eig = eigenvalues(m);
  double scale = 0;
  for (const auto& l : eig) scale = std::max(scale, std::abs(l));
  if (scale == 0.0) throw NumericError("no principal logarithm: singular matrix");
  for (const auto& l : eig) {
    if (std::abs(l) <= 1e-14 * scale)
      throw NumericError("no principal logarithm: singular matrix");
    if (l.real() <= 0 && std::abs(l.imag()) <= 1e-14 * scale)
      throw NumericError("no principal logarithm: eigenvalue on the negative real axis");
  }

  double c = 0;
  if (is_positive_scalar_identity(m, &c)) return Matrix::scalar(n, std::log(c));

  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < eig.size(); ++i)
    for (std::size_t j = i + 1; j < eig.size(); ++j)
      min_gap = std::min(min_gap, std::abs(eig[i] - eig[j]));

  if (min_gap > 1e-8 * scale) {
    CMatrix v(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto vec = eigenvector(m, eig[j]);
      for (std::size_t i = 0; i < n; ++i) v(i, j) = vec[i];
    }
    std::vector<Complex> lu = v.a;
    std::vector<std::size_t> perm;
    if (lu_factor(lu, n, perm, 1e-300)) {
      CMatrix id(n);
      for (std::size_t i = 0; i < n; ++i) id(i, i) = 1.0;
      CMatrix vinv(n);
      vinv.a = lu_solve(lu, n, perm, id.a);
      const double cond = cnorm_fro(v) * cnorm_fro(vinv);
      if (cond < Tolerances::kEigvecCondition) {
        CMatrix d(n);
        for (std::size_t i = 0; i < n; ++i) d(i, i) = std::log(eig[i]);
        const CMatrix lc = cmul(cmul(v, d), vinv);
        Matrix l(n);
        double imag = 0;
        for (std::size_t i = 0; i < n * n; ++i) {
          l.data()[i] = lc.a[i].real();
          imag = std::max(imag, std::abs(lc.a[i].imag()));
        }
        const double lnorm = std::max(1.0, norm_1(l));
        if (imag <= 1e-9 * lnorm &&
            norm_1(mat_exp(l) - m) <= Tolerances::kLogRoundTrip * norm_1(m) * lnorm)
          return l;
      }
    }
  }
  return log_inverse_scaling_squaring(m);
}

// ---------------------------------------------------------------------------
// Eigenvalues

std::vector<Complex> eigenvalues(const Matrix& m) {
  require_square_finite(m, "eigenvalues");
  const std::size_t n = m.dim();
  std::vector<Complex> out;
  if (n == 1) {
    out.emplace_back(m(0, 0), 0.0);
  } else if (n == 2) {
    out = eigenvalues_2x2(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
  } else {
    std::vector<double> h(m.data().begin(), m.data().end());
    hessenberg_reduce(h, n);
    std::vector<double> wr, wi;
    hessenberg_qr(h, static_cast<int>(n), wr, wi);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(wr[i], wi[i]);
  }
  std::sort(out.begin(), out.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

std::vector<Complex> eigenvector(const Matrix& m, Complex lambda) {
  require_square_finite(m, "eigenvector");
  const std::size_t n = m.dim();
  const double scale = std::max(norm_inf(m), 1e-300);
  std::vector<Complex> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = m(i, j);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] -= lambda;

  // Partial-pivot LU with tiny pivots replaced; the near-singular system
  // amplifies the eigen-direction, which is what inverse iteration needs.
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  const double tiny = std::numeric_limits<double>::epsilon() * scale;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a[k * n + k]);
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > best) {
        best = std::abs(a[i * n + k]);
        piv = i;
      }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
      std::swap(perm[k], perm[piv]);
    }
    if (std::abs(a[k * n + k]) < tiny) a[k * n + k] = tiny;
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex l = a[i * n + k] / a[k * n + k];
      a[i * n + k] = l;
      for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= l * a[k * n + j];
    }
  }
  std::vector<Complex> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = Complex(1.0 + 0.1 * static_cast<double>(i), 0.03 * static_cast<double>(i));
  for (int it = 0; it < 4; ++it) {
    std::vector<Complex> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = v[perm[i]];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < i; ++k) x[i] -= a[i * n + k] * x[k];
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t k = ii + 1; k < n; ++k) x[ii] -= a[ii * n + k] * x[k];
      x[ii] /= a[ii * n + ii];
    }
    double nx = 0;
    for (const auto& e : x) nx += std::norm(e);
    nx = std::sqrt(nx);
    if (!(nx > 0) || !std::isfinite(nx)) throw NumericError("eigenvector: inverse iteration failed");
    for (std::size_t i = 0; i < n; ++i) v[i] = x[i] / nx;
  }
  // Fix the phase so the largest component is real and positive.
  std::size_t big = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(v[i]) > std::abs(v[big])) big = i;
  const Complex phase = std::abs(v[big]) / v[big];
  for (auto& e : v) e *= phase;
  return v;
}

// ---------------------------------------------------------------------------

double norm2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dist2(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("dist2: size mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

std::string to_string(const Matrix& m) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < m.dim(); ++i) {
    os << (i ? ", [" : "[");
    for (std::size_t j = 0; j < m.dim(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      os << (j ? ", " : "") << buf;
    }
    os << ']';
  }
  os << ']';
  return os.str();
}

}  // namespace impulsive
