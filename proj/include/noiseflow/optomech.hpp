#pragma once

// Two driven cavities coupled to one mechanical mode, after linearisation and
// adiabatic elimination of the mechanics in the sideband-resolved regime.
// Everything is in the frame rotating at the common drive frequency.

#include "noiseflow/cascaded.hpp"
#include "noiseflow/linalg.hpp"

namespace noiseflow {

struct OmParams {
  double omega_m = 0.0;
  double gamma_m = 0.0;
  double Delta1 = 0.0;
  double Delta2 = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa_int1 = 0.0;
  double kappa_ext1 = 0.0;
  double kappa_int2 = 0.0;
  double kappa_ext2 = 0.0;
  /// Direct photon hopping, real.
  double J = 0.0;
  /// Phase of the second optomechanical coupling (G1 is real).
  double phi = 0.0;
  double G1 = 0.0;
  double G2 = 0.0;
  /// Frequency at which the mechanical susceptibility is frozen.
  double Omega = 0.0;
  double Nbar1 = 0.0;
  double Nbar2 = 0.0;
  double Nbar_m = 0.0;

  void validate() const;
};

struct DriveSpec {
  double g1 = 0.0;
  double g2 = 0.0;
  Complex E1{};
  Complex E2{};
};

struct LinearizedDrive {
  Complex alpha1{};
  Complex alpha2{};
  double G1 = 0.0;
  double G2 = 0.0;
  /// arg(alpha2) - arg(alpha1): the phase absorbed into OmParams::phi.
  double relative_phase = 0.0;
  /// |alpha_i| >= 10 for both cavities.
  bool linearization_valid = false;
};

struct Susceptibility {
  Complex chi{};
  Complex chi_tilde{};
  double nu = 0.0;
};

struct OmDrift {
  ComplexMatrix2 M;
  /// Mechanical-noise coupling after the gauge b_in -> i e^{-i nu} b_in.
  ComplexVector2 mech_coupling{};
};

struct NonreciprocalDesign {
  double J_star = 0.0;
  double phi_star = 0.0;
  /// |F| after substituting (J_star, phi_star).
  double F_residual = 0.0;
};

/// chi_m(w) = 1 / (gamma_m/2 - i (w - omega_m)).
Complex mech_chi(double omega, const OmParams& p);

/// chi, chi_tilde = chi(w) |chi(Omega)| / chi(Omega), nu = arg chi(Omega).
Susceptibility mech_susceptibility(double omega, const OmParams& p);

/// alpha_i = 2 E_i / (kappa_i + 2 i Delta_i), G_i = g_i |alpha_i|.
LinearizedDrive linearize(const DriveSpec& d, const OmParams& p);

OmDrift build_om_drift(const OmParams& p, double omega);

/// Freezes chi at Omega and reads off the cascaded parameters.
CascadedParams map_to_cascaded(const OmParams& p);

/// J and phi that make the mapped F vanish.
NonreciprocalDesign design_nonreciprocal(const OmParams& p);

/// Copy of p with J and phi replaced by the design values.
OmParams apply_design(const OmParams& p);

/// Microwave electromechanics parameters (rates in rad/s, 2 pi x Hz).
OmParams preset_microwave();

/// Cavity resonance recorded alongside the microwave preset (rad/s).
inline constexpr double kMicrowaveCavityFrequency = 2.0 * 3.141592653589793238 * 5e9;

/// Linewidth-weighted bath occupation (kappa_ext N_ext + kappa_int N_int)/kappa.
double combined_cavity_occupation(double kappa_ext, double Nbar_ext, double kappa_int,
                                  double Nbar_int);

}  // namespace noiseflow
