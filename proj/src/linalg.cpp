#include "noiseflow/linalg.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "noiseflow/error.hpp"

namespace noiseflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kNonSymmetricInput: return "NonSymmetricInput";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kUnstableEffectiveDrift: return "UnstableEffectiveDrift";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kUnstable: return "Unstable";
    case ErrorCode::kUnsupportedParams: return "UnsupportedParams";
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kDegenerateCavity: return "DegenerateCavity";
    case ErrorCode::kNoCoupling: return "NoCoupling";
    case ErrorCode::kZeroRateChannel: return "ZeroRateChannel";
    case ErrorCode::kOutsideAdmissibleRegion: return "OutsideAdmissibleRegion";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kNegativeOccupation: return "NegativeOccupation";
  }
  return "Unknown";
}

namespace {

std::string admissible_message(double requested, double last, const std::string& reason) {
  std::ostringstream os;
  os.precision(17);
  os << "s = " << requested << " is not reachable (last admissible s = " << last
     << "): " << reason;
  return os.str();
}

}  // namespace

OutsideAdmissibleRegion::OutsideAdmissibleRegion(double requested_s, double last_admissible_s,
                                                 const std::string& reason)
    : Error(ErrorCode::kOutsideAdmissibleRegion,
            admissible_message(requested_s, last_admissible_s, reason)),
      requested_s_(requested_s),
      last_admissible_s_(last_admissible_s) {}

bool ComplexMatrix2::is_finite() const {
  for (const Complex& z : data_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

RealMatrix4 symmetrized(const RealMatrix4& m) { return 0.5 * (m + m.transpose()); }

double asymmetry(const RealMatrix4& m) { return (m - m.transpose()).max_abs(); }

EmbeddingMatrix real_embedding_matrix(const ComplexVector2& u) {
  EmbeddingMatrix r;
  for (std::size_t k = 0; k < 2; ++k) {
    r(2 * k, 0) = u[k].real();
    r(2 * k, 1) = -u[k].imag();
    r(2 * k + 1, 0) = u[k].imag();
    r(2 * k + 1, 1) = u[k].real();
  }
  return r;
}

RealMatrix4 embed_drift(const ComplexMatrix2& m) {
  RealMatrix4 a;
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t l = 0; l < 2; ++l) {
      const Complex z = m(k, l);
      a(2 * k, 2 * l) = z.real();
      a(2 * k, 2 * l + 1) = -z.imag();
      a(2 * k + 1, 2 * l) = z.imag();
      a(2 * k + 1, 2 * l + 1) = z.real();
    }
  return a;
}

std::array<Complex, 2> eigenvalues(const ComplexMatrix2& m) {
  // lambda = t/2 +- sqrt((a-d)^2/4 + bc); the discriminant written this way
  // avoids cancelling t^2/4 against det for nearly degenerate spectra.
  const Complex half_trace = 0.5 * m.trace();
  const Complex half_diff = 0.5 * (m(0, 0) - m(1, 1));
  const Complex root = std::sqrt(half_diff * half_diff + m(0, 1) * m(1, 0));
  return {half_trace + root, half_trace - root};
}

double stability_margin(const ComplexMatrix2& m) {
  const auto ev = eigenvalues(m);
  return std::max(ev[0].real(), ev[1].real());
}

bool is_hurwitz(const RealMatrix4& a) {
  // Faddeev-LeVerrier: p(x) = x^4 + c1 x^3 + c2 x^2 + c3 x + c4.
  std::array<double, 5> c{1.0, 0.0, 0.0, 0.0, 0.0};
  RealMatrix4 mk;
  for (int k = 1; k <= 4; ++k) {
    mk = a * mk + c[k - 1] * RealMatrix4::identity();
    c[k] = -(a * mk).trace() / k;
  }
  if (!(c[1] > 0.0 && c[3] > 0.0 && c[4] > 0.0)) return false;
  return c[1] * c[2] * c[3] - c[3] * c[3] - c[1] * c[1] * c[4] > 0.0;
}

namespace {

constexpr std::size_t kDim = 16;

struct LuFactors {
  std::array<std::array<double, kDim>, kDim> lu{};
  std::array<std::size_t, kDim> perm{};
};

std::size_t vec_index(std::size_t row, std::size_t col) { return row * 4 + col; }

LuFactors factor_lyapunov_operator(const RealMatrix4& a, double singular_pivot) {
  LuFactors f;
  auto& k = f.lu;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t m = 0; m < 4; ++m) {
        k[vec_index(i, j)][vec_index(m, j)] += a(i, m);
        k[vec_index(i, j)][vec_index(i, m)] += a(j, m);
      }

  double scale = 0.0;
  for (const auto& row : k)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) throw Error(ErrorCode::kSingularSystem, "Lyapunov operator is zero");

  for (std::size_t i = 0; i < kDim; ++i) f.perm[i] = i;
  for (std::size_t col = 0; col < kDim; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < kDim; ++r)
      if (std::abs(k[r][col]) > std::abs(k[pivot][col])) pivot = r;
    if (std::abs(k[pivot][col]) <= singular_pivot * scale)
      throw Error(ErrorCode::kSingularSystem,
                  "Lyapunov operator is numerically singular (drift not strictly stable)");
    if (pivot != col) {
      std::swap(k[pivot], k[col]);
      std::swap(f.perm[pivot], f.perm[col]);
    }
    for (std::size_t r = col + 1; r < kDim; ++r) {
      const double factor = k[r][col] / k[col][col];
      k[r][col] = factor;
      for (std::size_t c = col + 1; c < kDim; ++c) k[r][c] -= factor * k[col][c];
    }
  }
  return f;
}

std::array<double, kDim> lu_solve(const LuFactors& f, const std::array<double, kDim>& rhs) {
  std::array<double, kDim> x{};
  for (std::size_t i = 0; i < kDim; ++i) {
    double sum = rhs[f.perm[i]];
    for (std::size_t j = 0; j < i; ++j) sum -= f.lu[i][j] * x[j];
    x[i] = sum;
  }
  for (std::size_t i = kDim; i-- > 0;) {
    double sum = x[i];
    for (std::size_t j = i + 1; j < kDim; ++j) sum -= f.lu[i][j] * x[j];
    x[i] = sum / f.lu[i][i];
  }
  return x;
}

RealMatrix4 lyapunov_operator(const RealMatrix4& a, const RealMatrix4& v) {
  return a * v + v * a.transpose();
}

}  // namespace

double lyapunov_residual(const RealMatrix4& a, const RealMatrix4& n, const RealMatrix4& v) {
  return (lyapunov_operator(a, v) + n).max_abs();
}

RealMatrix4 solve_lyapunov(const RealMatrix4& a, const RealMatrix4& n,
                           const LyapunovOptions& options) {
  if (!a.is_finite() || !n.is_finite())
    throw Error(ErrorCode::kInvalidInput, "Lyapunov inputs must be finite");
  if (asymmetry(n) > options.symmetry_tolerance * n.max_abs())
    throw Error(ErrorCode::kNonSymmetricInput, "noise matrix is not symmetric");

  const LuFactors factors = factor_lyapunov_operator(a, options.singular_pivot);

  std::array<double, kDim> rhs{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) rhs[vec_index(i, j)] = -n(i, j);
  std::array<double, kDim> x = lu_solve(factors, rhs);

  auto unpack = [](const std::array<double, kDim>& vec) {
    RealMatrix4 m;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) m(i, j) = vec[vec_index(i, j)];
    return m;
  };

  // One sweep of iterative refinement against the unvectorised residual.
  RealMatrix4 v = unpack(x);
  const RealMatrix4 r = -(lyapunov_operator(a, v) + n);
  std::array<double, kDim> r_vec{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) r_vec[vec_index(i, j)] = r(i, j);
  const std::array<double, kDim> dx = lu_solve(factors, r_vec);
  for (std::size_t i = 0; i < kDim; ++i) x[i] += dx[i];

  return symmetrized(unpack(x));
}

double riccati_residual(const RealMatrix4& a, const RealMatrix4& n, const RealMatrix4& f_minus,
                        const RealMatrix4& f_plus, const RealMatrix4& v) {
  const RealMatrix4 shifted = a - f_minus;
  return (lyapunov_operator(shifted, v) + v * f_plus * v + n).max_abs();
}

RealMatrix4 solve_riccati_biased(const RealMatrix4& a, const RealMatrix4& n,
                                 const RealMatrix4& f_minus, const RealMatrix4& f_plus,
                                 const RealMatrix4& v0, const RiccatiOptions& options) {
  const RealMatrix4 shifted = a - f_minus;
  RealMatrix4 v = symmetrized(v0);
  for (int iteration = 0; iteration < options.max_iterations; ++iteration) {
    const RealMatrix4 drift = shifted + v * f_plus;
    if (!is_hurwitz(drift))
      throw Error(ErrorCode::kUnstableEffectiveDrift,
                  "effective drift A - F- + V F+ is not Hurwitz");
    const RealMatrix4 constant = symmetrized(n - v * f_plus * v);
    RealMatrix4 next;
    try {
      next = solve_lyapunov(drift, constant, options.lyapunov);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kSingularSystem)
        throw Error(ErrorCode::kUnstableEffectiveDrift, e.what());
      throw;
    }
    const double step = (next - v).max_abs();
    v = next;
    if (!v.is_finite()) break;
    if (step <= options.step_tolerance * std::max(1.0, v.max_abs())) {
      const double residual = riccati_residual(a, n, f_minus, f_plus, v);
      if (residual <= options.residual_tolerance * std::max(n.norm_inf(), 1.0)) return v;
      throw Error(ErrorCode::kNoConvergence, "Newton iterates stalled with a large residual");
    }
  }
  throw Error(ErrorCode::kNoConvergence, "Newton-Kleinman iteration cap reached");
}

}  // namespace noiseflow
