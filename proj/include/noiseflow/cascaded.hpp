#pragma once

// Two oscillators c1, c2 with local baths (kappa1, kappa2), a shared bath
// (gamma1, gamma2, phase phi) and a residual coherent hopping F. Rates are in
// whatever angular-frequency unit the caller picks; every formula here is
// homogeneous in the rates.

#include <array>
#include <utility>

#include "noiseflow/linalg.hpp"

namespace noiseflow {

struct CascadedParams {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double phi = 0.0;
  Complex F{};
  double Nbar1 = 0.0;
  double Nbar2 = 0.0;
  double Nbar3 = 0.0;

  /// Delta = omega2 - omega1.
  double detuning() const { return omega2 - omega1; }
  /// Collective damping rate of the shared channel.
  double kappa3() const { return gamma1 + gamma2; }

  /// Throws kInvalidParams on negative rates/occupations or non-finite fields.
  void validate() const;

  /// kappa1 == kappa2 == gamma1 == gamma2 to relative tolerance.
  bool equal_rates(double rel_tol = 1e-12) const;

  /// Sets all four coupling rates to kappa.
  static CascadedParams equal_rate(double kappa, double detuning, Complex F, double phi,
                                   double Nbar1, double Nbar2, double Nbar3);
};

struct ChannelSpec {
  int index = 0;
  ComplexVector2 u{};
  double rate = 0.0;
  double Nbar = 0.0;
};

struct LinearSystem {
  ComplexMatrix2 M;
  RealMatrix4 A;
  std::array<ChannelSpec, 3> channels;
  RealMatrix4 N;
};

struct CovarianceMatrix {
  RealMatrix4 V;
};

struct Occupations {
  double n1 = 0.0;
  double n2 = 0.0;
  /// Set when a slightly negative value was clamped to zero.
  bool clamped = false;
};

struct OccupationReport {
  double n1 = 0.0;
  double n2 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double dn1 = 0.0;
  double dn2 = 0.0;
};

/// Drift and noise for an arbitrary complex drift and three channels:
/// A = embed(M), N = sum_j (Nbar_j + 1/2) R(u_j) R(u_j)^T.
LinearSystem make_linear_system(const ComplexMatrix2& m, const std::array<ChannelSpec, 3>& channels);

LinearSystem build_system(const CascadedParams& p);

/// Throws kUnstable unless stability_margin(M) < 0.
CovarianceMatrix steady_state(const LinearSystem& sys);
CovarianceMatrix steady_state(const CascadedParams& p);

Occupations occupations(const CovarianceMatrix& cov);

/// Closed-form equal-rate occupations for arbitrary F and Delta.
/// Throws kUnsupportedParams unless p.equal_rates().
Occupations closed_form_occupations(const CascadedParams& p);

/// m_i = (Nbar_i + Nbar3)/2, the |Delta| -> infinity limit.
std::pair<double, double> disconnected_baseline(const CascadedParams& p);

enum class OccupationMethod { kClosedForm, kLyapunov };

/// n, m and dn = n - m. The closed-form path uses the F = 0 Lorentzian law
/// when F vanishes and the general-F difference formulas otherwise.
OccupationReport delta_n(const CascadedParams& p,
                         OccupationMethod method = OccupationMethod::kClosedForm);

/// dn2 at F = 0 written against the baselines:
/// 2 kappa^2/(4 kappa^2 + Delta^2) (m1 - m3).
double nonreciprocal_dn2_from_baselines(const CascadedParams& p);
/// The same quantity against the bath occupations:
/// kappa^2/(4 kappa^2 + Delta^2) (Nbar1 - Nbar3).
double nonreciprocal_dn2_from_baths(const CascadedParams& p);

/// Bose-Einstein occupation 1/(exp(hbar w / kB T) - 1); T = 0 gives 0.
double occupation_from_temperature(double temperature, double omega, double hbar_over_kB);
/// Inverse of occupation_from_temperature for Nbar > 0 (Nbar = 0 gives T = 0).
double temperature_from_occupation(double occupation, double omega, double hbar_over_kB);

}  // namespace noiseflow
