#pragma once

// Small dense kernels for the two-mode problem: 2x2 complex drift matrices,
// 4x4 real quadrature matrices, and the Lyapunov / biased Riccati solvers
// built on them.
//
// Quadrature ordering is (x1, p1, x2, p2) with x = (c + c^dag)/sqrt(2) and
// p = -i (c - c^dag)/sqrt(2).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace noiseflow {

using Complex = std::complex<double>;
using ComplexVector2 = std::array<Complex, 2>;

class ComplexMatrix2 {
 public:
  constexpr ComplexMatrix2() = default;
  constexpr ComplexMatrix2(Complex m00, Complex m01, Complex m10, Complex m11)
      : data_{m00, m01, m10, m11} {}

  static constexpr ComplexMatrix2 diagonal(Complex d0, Complex d1) {
    return {d0, Complex{}, Complex{}, d1};
  }

  constexpr Complex& operator()(std::size_t r, std::size_t c) { return data_[2 * r + c]; }
  constexpr const Complex& operator()(std::size_t r, std::size_t c) const {
    return data_[2 * r + c];
  }

  constexpr Complex trace() const { return data_[0] + data_[3]; }
  constexpr Complex determinant() const { return data_[0] * data_[3] - data_[1] * data_[2]; }

  bool is_finite() const;

 private:
  std::array<Complex, 4> data_{};
};

template <std::size_t Rows, std::size_t Cols>
class Matrix {
 public:
  static constexpr std::size_t kRows = Rows;
  static constexpr std::size_t kCols = Cols;

  constexpr Matrix() = default;

  static constexpr Matrix zero() { return Matrix{}; }

  static constexpr Matrix identity() requires(Rows == Cols) {
    Matrix m;
    for (std::size_t i = 0; i < Rows; ++i) m(i, i) = 1.0;
    return m;
  }

  constexpr double& operator()(std::size_t r, std::size_t c) { return data_[r * Cols + c]; }
  constexpr double operator()(std::size_t r, std::size_t c) const { return data_[r * Cols + c]; }

  constexpr Matrix<Cols, Rows> transpose() const {
    Matrix<Cols, Rows> t;
    for (std::size_t r = 0; r < Rows; ++r)
      for (std::size_t c = 0; c < Cols; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  constexpr double trace() const requires(Rows == Cols) {
    double t = 0.0;
    for (std::size_t i = 0; i < Rows; ++i) t += (*this)(i, i);
    return t;
  }

  /// Largest absolute entry.
  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Induced infinity norm (max absolute row sum).
  double norm_inf() const {
    double best = 0.0;
    for (std::size_t r = 0; r < Rows; ++r) {
      double row = 0.0;
      for (std::size_t c = 0; c < Cols; ++c) {
        row += std::abs((*this)(r, c));
      }
      best = std::max(best, row);
    }
    return best;
  }

  bool is_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  constexpr Matrix& operator+=(const Matrix& o) {
    for (std::size_t i = 0; i < Rows * Cols; ++i) data_[i] += o.data_[i];
    return *this;
  }
  constexpr Matrix& operator-=(const Matrix& o) {
    for (std::size_t i = 0; i < Rows * Cols; ++i) data_[i] -= o.data_[i];
    return *this;
  }
  constexpr Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend constexpr Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend constexpr Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend constexpr Matrix operator-(Matrix a) { return a *= -1.0; }
  friend constexpr Matrix operator*(Matrix a, double s) { return a *= s; }
  friend constexpr Matrix operator*(double s, Matrix a) { return a *= s; }

  template <std::size_t Inner>
  friend constexpr Matrix<Rows, Inner> operator*(const Matrix& a, const Matrix<Cols, Inner>& b) {
    Matrix<Rows, Inner> out;
    for (std::size_t r = 0; r < Rows; ++r)
      for (std::size_t k = 0; k < Cols; ++k) {
        const double ark = a(r, k);
        for (std::size_t c = 0; c < Inner; ++c) out(r, c) += ark * b(k, c);
      }
    return out;
  }

  friend constexpr bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::array<double, Rows * Cols> data_{};
};

using RealMatrix4 = Matrix<4, 4>;
using EmbeddingMatrix = Matrix<4, 2>;

/// Symmetric part (M + M^T)/2.
RealMatrix4 symmetrized(const RealMatrix4& m);

/// Largest |M - M^T| entry.
double asymmetry(const RealMatrix4& m);

/// Real 4x2 image of a complex 2-vector: mode-k rows are
/// [Re u_k, -Im u_k] and [Im u_k, Re u_k]. R(u) R(u)^T is invariant under
/// a global phase on u.
EmbeddingMatrix real_embedding_matrix(const ComplexVector2& u);

/// Quadrature drift A with q' = A q whenever c' = M c.
RealMatrix4 embed_drift(const ComplexMatrix2& m);

/// Both eigenvalues of a 2x2 complex matrix from the characteristic quadratic.
std::array<Complex, 2> eigenvalues(const ComplexMatrix2& m);

/// max Re(lambda) over the spectrum of M. Negative means asymptotically stable.
double stability_margin(const ComplexMatrix2& m);

/// Routh-Hurwitz test on the characteristic polynomial of a real 4x4 matrix.
bool is_hurwitz(const RealMatrix4& a);

struct LyapunovOptions {
  /// Relative asymmetry of N tolerated before kNonSymmetricInput.
  double symmetry_tolerance = 1e-12;
  /// Pivot threshold, relative to the largest entry of the 16x16 operator.
  double singular_pivot = 1e-13;
};

/// Solves A V + V A^T + N = 0 through the 16x16 vectorised system
/// (Gaussian elimination with partial pivoting, one refinement sweep).
RealMatrix4 solve_lyapunov(const RealMatrix4& a, const RealMatrix4& n,
                           const LyapunovOptions& options = {});

/// ||A V + V A^T + N|| in the max-abs norm.
double lyapunov_residual(const RealMatrix4& a, const RealMatrix4& n, const RealMatrix4& v);

struct RiccatiOptions {
  int max_iterations = 100;
  /// Newton stops once successive iterates differ by at most
  /// step_tolerance * max(1, ||V||) in the max-abs norm.
  double step_tolerance = 1e-11;
  /// Accepted final residual, relative to max(||N||_inf, 1).
  double residual_tolerance = 1e-9;
  LyapunovOptions lyapunov{};
};

/// Stabilising solution of
///   0 = (A - F-) V + V (A - F-)^T + V F+ V + N
/// by Newton-Kleinman iteration warm-started at v0. Each step solves a
/// Lyapunov equation with drift (A - F- + V_k F+) and constant term
/// N - V_k F+ V_k.
RealMatrix4 solve_riccati_biased(const RealMatrix4& a, const RealMatrix4& n,
                                 const RealMatrix4& f_minus, const RealMatrix4& f_plus,
                                 const RealMatrix4& v0, const RiccatiOptions& options = {});

double riccati_residual(const RealMatrix4& a, const RealMatrix4& n, const RealMatrix4& f_minus,
                        const RealMatrix4& f_plus, const RealMatrix4& v);

}  // namespace noiseflow
