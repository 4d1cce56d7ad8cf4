#pragma once

// Dense real linear algebra for small square matrices (m <= 8 is the target,
// m <= 64 is accepted). Everything here is a pure function of its inputs.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace impulsive {

using Complex = std::complex<double>;
using Vector = std::vector<double>;

/// Numerical thresholds used across the library. Tests reference these
/// directly so there is one place to change them.
struct Tolerances {
  static constexpr std::size_t kMaxDim = 64;
  static constexpr int kQrIterationCap = 10000;
  static constexpr double kQrDeflation = 1e-13;
  static constexpr double kSingularPivot = 1e-13;
  static constexpr double kCommutator = 1e-9;
  static constexpr double kDetFloor = 1e-12;
  static constexpr double kEigvecCondition = 1e8;
  static constexpr double kLogRoundTrip = 1e-11;
  static constexpr double kPeriodicity = 1e-9;
  static constexpr double kInflation = 1.01;
  static constexpr double kSequenceInflation = 1.001;
  static constexpr double kConstantFloor = 1e-12;
};

/// Square row-major matrix with finite entries.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dim);
  Matrix(std::size_t dim, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t dim);
  static Matrix zero(std::size_t dim) { return Matrix(dim); }
  static Matrix diagonal(std::span<const double> diag);
  static Matrix scalar(std::size_t dim, double value);

  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return dim_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix transpose() const;
  double trace() const;
  bool all_finite() const;

  Vector apply(std::span<const double> x) const;
  void apply_into(std::span<const double> x, std::span<double> out) const;

  Matrix& operator+=(const Matrix& rhs);
  Matrix& operator-=(const Matrix& rhs);
  Matrix& operator*=(double s);

  friend Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
  friend Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
  friend Matrix operator*(Matrix lhs, double s) { return lhs *= s; }
  friend Matrix operator*(double s, Matrix rhs) { return rhs *= s; }
  friend Matrix operator-(Matrix m) { return m *= -1.0; }
  friend Matrix operator*(const Matrix& lhs, const Matrix& rhs);
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// Norms.
double norm_1(const Matrix& m);      ///< max column sum
double norm_inf(const Matrix& m);    ///< max row sum
double norm_fro(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Largest singular value, by power iteration on MᵀM.
double spectral_norm(const Matrix& m);

/// Inverse by Gaussian elimination with partial pivoting. Throws
/// NumericError("singular matrix") when a pivot drops below
/// Tolerances::kSingularPivot * ‖M‖∞.
Matrix inverse(const Matrix& m);

double determinant(const Matrix& m);

/// M^k for integer k by binary exponentiation; negative k inverts first.
Matrix power(const Matrix& m, long long k);

/// e^M by scaling and squaring with a degree-13 Padé kernel (lower degrees
/// when ‖M‖₁ is small).
Matrix mat_exp(const Matrix& m);

/// Principal logarithm. Diagonalizable input goes through an
/// eigendecomposition; defective or badly conditioned input falls back to
/// inverse scaling and squaring. Throws NumericError("no principal
/// logarithm") when M is singular or has an eigenvalue on the closed
/// negative real axis.
Matrix mat_log_principal(const Matrix& m);

/// All eigenvalues with multiplicity, sorted by (real, imag) ascending.
/// Closed form for m <= 2, Householder-Hessenberg + Francis double-shift QR
/// otherwise.
std::vector<Complex> eigenvalues(const Matrix& m);

/// Unit eigenvector for a (numerically exact) eigenvalue, by complex
/// inverse iteration.
std::vector<Complex> eigenvector(const Matrix& m, Complex lambda);

// Plain vector helpers used throughout.
double norm2(std::span<const double> v);
double dist2(std::span<const double> a, std::span<const double> b);

std::string to_string(const Matrix& m);

}  // namespace impulsive
