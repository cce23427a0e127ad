#include "noiseflow/cascaded.hpp"

#include <cmath>
#include <string>
#include <tuple>

#include "noiseflow/error.hpp"

namespace noiseflow {

namespace {

void require_nonnegative(double value, const char* name) {
  if (!std::isfinite(value))
    throw Error(ErrorCode::kInvalidParams, std::string(name) + " must be finite");
  if (value < 0.0)
    throw Error(ErrorCode::kInvalidParams, std::string(name) + " must be non-negative");
}

void require_finite(double value, const char* name) {
  if (!std::isfinite(value))
    throw Error(ErrorCode::kInvalidParams, std::string(name) + " must be finite");
}

void require_equal_rates(const CascadedParams& p) {
  if (!p.equal_rates())
    throw Error(ErrorCode::kUnsupportedParams,
                "closed forms need kappa1 == kappa2 == gamma1 == gamma2");
}

// Shorthand for the equal-rate closed forms, with theta = phi.
struct EqualRateTerms {
  double kappa;
  double detuning;
  double f_abs2;
  double re;  // Re{F e^{i phi}}
  double im;  // Im{F e^{i phi}}
  double denominator;  // 3|F|^2 + 4 kappa (kappa + im) + im^2 + Delta^2

  explicit EqualRateTerms(const CascadedParams& p)
      : kappa(p.kappa1), detuning(p.detuning()), f_abs2(std::norm(p.F)) {
    const Complex rotated = p.F * std::polar(1.0, p.phi);
    re = rotated.real();
    im = rotated.imag();
    denominator = 3.0 * f_abs2 + 4.0 * kappa * (kappa + im) + im * im + detuning * detuning;
  }
};

}  // namespace

void CascadedParams::validate() const {
  require_finite(omega1, "omega1");
  require_finite(omega2, "omega2");
  require_finite(phi, "phi");
  require_finite(F.real(), "Re F");
  require_finite(F.imag(), "Im F");
  require_nonnegative(kappa1, "kappa1");
  require_nonnegative(kappa2, "kappa2");
  require_nonnegative(gamma1, "gamma1");
  require_nonnegative(gamma2, "gamma2");
  require_nonnegative(Nbar1, "Nbar1");
  require_nonnegative(Nbar2, "Nbar2");
  require_nonnegative(Nbar3, "Nbar3");
}

bool CascadedParams::equal_rates(double rel_tol) const {
  const double scale = std::max({kappa1, kappa2, gamma1, gamma2});
  if (scale == 0.0) return false;
  const double lo = std::min({kappa1, kappa2, gamma1, gamma2});
  return scale - lo <= rel_tol * scale;
}

CascadedParams CascadedParams::equal_rate(double kappa, double detuning, Complex F, double phi,
                                          double Nbar1, double Nbar2, double Nbar3) {
  CascadedParams p;
  p.omega1 = 0.0;
  p.omega2 = detuning;
  p.kappa1 = p.kappa2 = p.gamma1 = p.gamma2 = kappa;
  p.phi = phi;
  p.F = F;
  p.Nbar1 = Nbar1;
  p.Nbar2 = Nbar2;
  p.Nbar3 = Nbar3;
  return p;
}

LinearSystem make_linear_system(const ComplexMatrix2& m,
                                const std::array<ChannelSpec, 3>& channels) {
  LinearSystem sys;
  sys.M = m;
  sys.A = embed_drift(m);
  sys.channels = channels;
  for (const ChannelSpec& ch : channels) {
    const EmbeddingMatrix r = real_embedding_matrix(ch.u);
    sys.N += (ch.Nbar + 0.5) * (r * r.transpose());
  }
  sys.N = symmetrized(sys.N);
  return sys;
}

LinearSystem build_system(const CascadedParams& p) {
  p.validate();
  const Complex i{0.0, 1.0};
  const double cross = std::sqrt(p.gamma1 * p.gamma2);
  const Complex phase = std::polar(1.0, p.phi);

  ComplexMatrix2 m;
  m(0, 0) = -i * p.omega1 - 0.5 * (p.gamma1 + p.kappa1);
  m(0, 1) = -i * p.F;
  m(1, 0) = -i * std::conj(p.F) - cross * phase;
  m(1, 1) = -i * p.omega2 - 0.5 * (p.gamma2 + p.kappa2);

  std::array<ChannelSpec, 3> channels;
  channels[0] = {1, {std::sqrt(p.kappa1), 0.0}, p.kappa1, p.Nbar1};
  channels[1] = {2, {0.0, std::sqrt(p.kappa2)}, p.kappa2, p.Nbar2};
  channels[2] = {3, {std::sqrt(p.gamma1), std::sqrt(p.gamma2) * phase}, p.kappa3(), p.Nbar3};
  return make_linear_system(m, channels);
}

CovarianceMatrix steady_state(const LinearSystem& sys) {
  const double margin = stability_margin(sys.M);
  if (!(margin < 0.0))
    throw Error(ErrorCode::kUnstable,
                "drift has an eigenvalue with Re >= 0 (margin " + std::to_string(margin) + ")");
  return {solve_lyapunov(sys.A, sys.N)};
}

CovarianceMatrix steady_state(const CascadedParams& p) { return steady_state(build_system(p)); }

Occupations occupations(const CovarianceMatrix& cov) {
  const RealMatrix4& v = cov.V;
  Occupations out;
  out.n1 = 0.5 * (v(0, 0) + v(1, 1) - 1.0);
  out.n2 = 0.5 * (v(2, 2) + v(3, 3) - 1.0);
  if (out.n1 < 0.0) {
    out.n1 = 0.0;
    out.clamped = true;
  }
  if (out.n2 < 0.0) {
    out.n2 = 0.0;
    out.clamped = true;
  }
  return out;
}

Occupations closed_form_occupations(const CascadedParams& p) {
  p.validate();
  require_equal_rates(p);
  const EqualRateTerms t(p);
  const double k = t.kappa;
  const double d = t.detuning;
  const double n1 = p.Nbar1, n2 = p.Nbar2, n3 = p.Nbar3;
  const double total = n1 + n2 + n3;
  const double lorentz = 4.0 * k * k + d * d;

  Occupations out;
  out.n1 = (2.0 * t.f_abs2 * total + t.re * d * (n1 - n3) + 2.0 * t.im * t.im * n3 +
            2.0 * t.im * k * (n1 + 3.0 * n3) + lorentz * (n1 + n3)) /
           (2.0 * t.denominator);
  out.n2 = (2.0 * t.f_abs2 * total - t.re * d * (n2 - n3) + 2.0 * t.im * t.im * n3 +
            2.0 * t.im * k * (n2 + 3.0 * n3) + lorentz * (n2 + n3)) /
               (2.0 * t.denominator) +
           k * (2.0 * t.im + k) * (n1 - n3) / t.denominator;
  return out;
}

std::pair<double, double> disconnected_baseline(const CascadedParams& p) {
  p.validate();
  require_equal_rates(p);
  return {0.5 * (p.Nbar1 + p.Nbar3), 0.5 * (p.Nbar2 + p.Nbar3)};
}

double nonreciprocal_dn2_from_baselines(const CascadedParams& p) {
  const auto [m1, m2] = disconnected_baseline(p);
  const double k = p.kappa1;
  const double d = p.detuning();
  const double m3 = p.Nbar3;
  return 2.0 * k * k / (4.0 * k * k + d * d) * (m1 - m3);
}

double nonreciprocal_dn2_from_baths(const CascadedParams& p) {
  p.validate();
  require_equal_rates(p);
  const double k = p.kappa1;
  const double d = p.detuning();
  return k * k / (4.0 * k * k + d * d) * (p.Nbar1 - p.Nbar3);
}

OccupationReport delta_n(const CascadedParams& p, OccupationMethod method) {
  OccupationReport r;
  std::tie(r.m1, r.m2) = disconnected_baseline(p);

  if (method == OccupationMethod::kLyapunov) {
    const Occupations n = occupations(steady_state(p));
    r.n1 = n.n1;
    r.n2 = n.n2;
    r.dn1 = r.n1 - r.m1;
    r.dn2 = r.n2 - r.m2;
    return r;
  }

  if (p.F == Complex{}) {
    r.dn1 = 0.0;
    r.dn2 = nonreciprocal_dn2_from_baselines(p);
  } else {
    const EqualRateTerms t(p);
    const double k = t.kappa;
    const double d = t.detuning;
    const double n1 = p.Nbar1, n2 = p.Nbar2, n3 = p.Nbar3;
    const double mixing = t.im * (t.im + 2.0 * k);
    r.dn1 = (t.f_abs2 * (-n1 + 2.0 * n2 - n3) - (mixing - t.re * d) * (n1 - n3)) /
            (2.0 * t.denominator);
    r.dn2 = (t.f_abs2 * (2.0 * n1 - n2 - n3) - (mixing + t.re * d) * (n2 - n3) +
             2.0 * k * (2.0 * t.im + k) * (n1 - n3)) /
            (2.0 * t.denominator);
  }
  r.n1 = r.m1 + r.dn1;
  r.n2 = r.m2 + r.dn2;
  return r;
}

double occupation_from_temperature(double temperature, double omega, double hbar_over_kB) {
  if (!(temperature >= 0.0) || !std::isfinite(temperature))
    throw Error(ErrorCode::kInvalidInput, "temperature must be finite and >= 0");
  if (!(omega > 0.0) || !(hbar_over_kB > 0.0))
    throw Error(ErrorCode::kInvalidInput, "omega and hbar/kB must be positive");
  if (temperature == 0.0) return 0.0;
  return 1.0 / std::expm1(hbar_over_kB * omega / temperature);
}

double temperature_from_occupation(double occupation, double omega, double hbar_over_kB) {
  if (!(occupation >= 0.0) || !std::isfinite(occupation))
    throw Error(ErrorCode::kInvalidInput, "occupation must be finite and >= 0");
  if (!(omega > 0.0) || !(hbar_over_kB > 0.0))
    throw Error(ErrorCode::kInvalidInput, "omega and hbar/kB must be positive");
  if (occupation == 0.0) return 0.0;
  return hbar_over_kB * omega / std::log1p(1.0 / occupation);
}

}  // namespace noiseflow
