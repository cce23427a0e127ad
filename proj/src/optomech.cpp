#include "noiseflow/optomech.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "noiseflow/error.hpp"

namespace noiseflow {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kInvalidParams, message);
}

bool finite_all(std::initializer_list<double> values) {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

void OmParams::validate() const {
  check(finite_all({omega_m, gamma_m, Delta1, Delta2, kappa1, kappa2, kappa_int1, kappa_ext1,
                    kappa_int2, kappa_ext2, J, phi, G1, G2, Omega, Nbar1, Nbar2, Nbar_m}),
        "optomechanical parameters must be finite");
  check(gamma_m > 0.0, "gamma_m must be positive");
  check(kappa1 >= 0.0 && kappa2 >= 0.0, "cavity linewidths must be non-negative");
  check(kappa_int1 >= 0.0 && kappa_ext1 >= 0.0 && kappa_int2 >= 0.0 && kappa_ext2 >= 0.0,
        "intrinsic/extrinsic linewidths must be non-negative");
  check(std::abs(kappa1 - (kappa_int1 + kappa_ext1)) <= 1e-12 * std::max(1.0, kappa1),
        "kappa1 must equal kappa_int1 + kappa_ext1");
  check(std::abs(kappa2 - (kappa_int2 + kappa_ext2)) <= 1e-12 * std::max(1.0, kappa2),
        "kappa2 must equal kappa_int2 + kappa_ext2");
  check(G1 >= 0.0 && G2 >= 0.0, "G1 and G2 must be non-negative");
  check(Nbar1 >= 0.0 && Nbar2 >= 0.0 && Nbar_m >= 0.0, "occupations must be non-negative");
}

Complex mech_chi(double omega, const OmParams& p) {
  return 1.0 / Complex(0.5 * p.gamma_m, -(omega - p.omega_m));
}

Susceptibility mech_susceptibility(double omega, const OmParams& p) {
  Susceptibility s;
  s.chi = mech_chi(omega, p);
  const Complex reference = mech_chi(p.Omega, p);
  s.nu = std::arg(reference);
  s.chi_tilde = s.chi * std::polar(1.0, -s.nu);
  return s;
}

LinearizedDrive linearize(const DriveSpec& d, const OmParams& p) {
  auto amplitude = [](Complex drive, double kappa, double detuning) {
    const Complex denom(kappa, 2.0 * detuning);
    if (std::norm(denom) == 0.0)
      throw Error(ErrorCode::kDegenerateCavity, "4 Delta^2 + kappa^2 vanishes");
    return 2.0 * drive / denom;
  };
  LinearizedDrive out;
  out.alpha1 = amplitude(d.E1, p.kappa1, p.Delta1);
  out.alpha2 = amplitude(d.E2, p.kappa2, p.Delta2);
  out.G1 = d.g1 * std::abs(out.alpha1);
  out.G2 = d.g2 * std::abs(out.alpha2);
  const double arg1 = out.alpha1 == Complex{} ? 0.0 : std::arg(out.alpha1);
  const double arg2 = out.alpha2 == Complex{} ? 0.0 : std::arg(out.alpha2);
  out.relative_phase = std::remainder(arg2 - arg1, kTwoPi);
  out.linearization_valid = std::abs(out.alpha1) >= 10.0 && std::abs(out.alpha2) >= 10.0;
  return out;
}

OmDrift build_om_drift(const OmParams& p, double omega) {
  p.validate();
  const Susceptibility s = mech_susceptibility(omega, p);
  const Complex forward = std::polar(1.0, p.phi);
  const Complex backward = std::conj(forward);
  const double g12 = p.G1 * p.G2;

  OmDrift out;
  out.M(0, 0) = -kI * p.Delta1 - 0.5 * p.kappa1 - p.G1 * p.G1 * s.chi;
  out.M(0, 1) = -kI * p.J - s.chi * g12 * backward;
  out.M(1, 0) = -kI * p.J - s.chi * g12 * forward;
  out.M(1, 1) = -kI * p.Delta2 - 0.5 * p.kappa2 - p.G2 * p.G2 * s.chi;

  const double root_gamma = std::sqrt(p.gamma_m);
  out.mech_coupling = {p.G1 * root_gamma * s.chi_tilde,
                       p.G2 * root_gamma * s.chi_tilde * forward};
  return out;
}

CascadedParams map_to_cascaded(const OmParams& p) {
  p.validate();
  const Complex chi = mech_chi(p.Omega, p);
  CascadedParams c;
  c.omega1 = p.Delta1 + p.G1 * p.G1 * chi.imag();
  c.omega2 = p.Delta2 + p.G2 * p.G2 * chi.imag();
  c.gamma1 = 2.0 * p.G1 * p.G1 * chi.real();
  c.gamma2 = 2.0 * p.G2 * p.G2 * chi.real();
  c.kappa1 = p.kappa1;
  c.kappa2 = p.kappa2;
  c.phi = p.phi;
  c.F = p.J - kI * chi * (p.G1 * p.G2) * std::polar(1.0, -p.phi);
  c.Nbar1 = p.Nbar1;
  c.Nbar2 = p.Nbar2;
  c.Nbar3 = p.Nbar_m;
  return c;
}

NonreciprocalDesign design_nonreciprocal(const OmParams& p) {
  p.validate();
  const double g12 = p.G1 * p.G2;
  if (!(g12 > 0.0)) throw Error(ErrorCode::kNoCoupling, "G1 G2 must be positive");
  const Complex chi = mech_chi(p.Omega, p);

  // J - i chi G1 G2 e^{-i phi} = 0 with J real and positive fixes
  // J = G1 G2 |chi| and phi = arg(i chi).
  NonreciprocalDesign d;
  d.J_star = g12 * std::abs(chi);
  d.phi_star = std::arg(kI * chi);
  d.F_residual = std::abs(d.J_star - kI * chi * g12 * std::polar(1.0, -d.phi_star));
  return d;
}

OmParams apply_design(const OmParams& p) {
  const NonreciprocalDesign d = design_nonreciprocal(p);
  OmParams out = p;
  out.J = d.J_star;
  out.phi = d.phi_star;
  return out;
}

OmParams preset_microwave() {
  OmParams p;
  p.omega_m = kTwoPi * 6e6;
  p.gamma_m = kTwoPi * 100.0;
  p.Delta1 = p.omega_m;
  p.Delta2 = p.omega_m;
  p.kappa1 = kTwoPi * 2e6;
  p.kappa2 = kTwoPi * 2e6;
  p.kappa_ext1 = p.kappa1;
  p.kappa_ext2 = p.kappa2;
  p.J = kTwoPi * 1e6;
  // On resonance chi is real, so the phase that cancels F is pi/2.
  p.phi = std::numbers::pi / 2.0;
  p.G1 = kTwoPi * 7e3;
  p.G2 = kTwoPi * 7e3;
  p.Omega = p.omega_m;
  p.Nbar1 = 0.0;
  p.Nbar2 = 0.0;
  p.Nbar_m = 0.5;
  return p;
}

double combined_cavity_occupation(double kappa_ext, double Nbar_ext, double kappa_int,
                                  double Nbar_int) {
  const double kappa = kappa_ext + kappa_int;
  if (!(kappa > 0.0)) throw Error(ErrorCode::kInvalidInput, "total linewidth must be positive");
  if (kappa_ext < 0.0 || kappa_int < 0.0 || Nbar_ext < 0.0 || Nbar_int < 0.0)
    throw Error(ErrorCode::kInvalidInput, "linewidths and occupations must be non-negative");
  return (kappa_ext * Nbar_ext + kappa_int * Nbar_int) / kappa;
}

}  // namespace noiseflow
