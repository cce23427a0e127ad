#include <gtest/gtest.h>

#include "noiseflow/error.hpp"
#include "noiseflow/optomech.hpp"
#include "test_support.hpp"

namespace noiseflow {
namespace {

using testing::kPi;
using testing::relative_error;
using testing::random_om;
using testing::Rng;

constexpr double kTwoPi = 2.0 * kPi;

double entry_error(Complex got, Complex want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

TEST(Susceptibility, OnResonanceIsReal) {
  OmParams p = preset_microwave();
  const Susceptibility s = mech_susceptibility(p.omega_m, p);
  EXPECT_EQ(s.chi, Complex(2.0 / p.gamma_m, 0.0));
  EXPECT_EQ(s.nu, 0.0);
}

TEST(Susceptibility, DecaysFarFromResonance) {
  OmParams p = preset_microwave();
  EXPECT_LT(std::abs(mech_chi(p.omega_m + 1e12, p)), 1e-11);
}

TEST(Susceptibility, RealPartIdentity) {
  Rng rng(50);
  for (int trial = 0; trial < 100; ++trial) {
    const OmParams p = random_om(rng);
    const double w = p.omega_m + rng.uniform(-10.0, 10.0);
    const Susceptibility s = mech_susceptibility(w, p);
    EXPECT_LE(relative_error(2.0 * s.chi.real(), p.gamma_m * std::norm(s.chi), 1e-300), 1e-12);
    EXPECT_GE(s.chi.real(), 0.0);
    // chi_tilde is chi with the phase at Omega removed.
    const Susceptibility at_omega = mech_susceptibility(p.Omega, p);
    EXPECT_NEAR(at_omega.chi_tilde.imag(), 0.0, 1e-12 * std::abs(at_omega.chi));
    EXPECT_NEAR(std::abs(s.chi_tilde), std::abs(s.chi), 1e-12 * std::abs(s.chi));
  }
}

TEST(Linearize, Examples) {
  OmParams p = preset_microwave();
  DriveSpec none;
  none.g1 = none.g2 = 1.0;
  LinearizedDrive d = linearize(none, p);
  EXPECT_EQ(d.alpha1, Complex{});
  EXPECT_EQ(d.G1, 0.0);
  EXPECT_FALSE(d.linearization_valid);

  p.Delta1 = p.Delta2 = 0.0;
  DriveSpec drive;
  drive.g1 = drive.g2 = kTwoPi * 0.1;
  drive.E1 = 3.5e11;
  drive.E2 = Complex(0.0, 3.5e11);
  d = linearize(drive, p);
  EXPECT_LE(relative_error(std::abs(d.alpha1), 2.0 * 3.5e11 / p.kappa1), 1e-15);
  EXPECT_LE(relative_error(d.G1, drive.g1 * std::abs(d.alpha1)), 1e-15);
  EXPECT_NEAR(d.relative_phase, kPi / 2, 1e-15);
  EXPECT_TRUE(d.linearization_valid);
}

TEST(Linearize, PhotonNumberForPresetCoupling) {
  // G = 2 pi x 7 kHz from g = 2 pi x 0.1 Hz needs |alpha| = 7e4.
  OmParams p = preset_microwave();
  DriveSpec drive;
  drive.g1 = drive.g2 = kTwoPi * 0.1;
  const double alpha = 7e4;
  drive.E1 = drive.E2 = 0.5 * alpha * std::sqrt(4.0 * p.Delta1 * p.Delta1 + p.kappa1 * p.kappa1);
  const LinearizedDrive d = linearize(drive, p);
  EXPECT_LE(relative_error(std::abs(d.alpha1), alpha), 1e-12);
  EXPECT_LE(relative_error(d.G1, p.G1), 1e-12);
  EXPECT_TRUE(d.linearization_valid);
}

TEST(Linearize, DegenerateCavity) {
  OmParams p = preset_microwave();
  p.Delta1 = 0.0;
  p.kappa1 = p.kappa_ext1 = 0.0;
  DriveSpec drive;
  drive.E1 = 1.0;
  try {
    linearize(drive, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateCavity);
  }
}

TEST(OmDrift, BareCavitiesWithoutCoupling) {
  OmParams p = preset_microwave();
  p.G1 = p.G2 = 0.0;
  const OmDrift d = build_om_drift(p, p.Omega);
  EXPECT_EQ(d.M(0, 0), Complex(-0.5 * p.kappa1, -p.Delta1));
  EXPECT_EQ(d.M(1, 1), Complex(-0.5 * p.kappa2, -p.Delta2));
  EXPECT_EQ(d.M(0, 1), Complex(0.0, -p.J));
  EXPECT_EQ(d.M(1, 0), Complex(0.0, -p.J));
}

TEST(OmDrift, DesignClosesBackwardHopping) {
  Rng rng(51);
  for (int trial = 0; trial < 200; ++trial) {
    OmParams p = random_om(rng);
    p.G1 += 0.1;
    p.G2 += 0.1;
    const OmDrift d = build_om_drift(apply_design(p), p.Omega);
    EXPECT_LE(std::abs(d.M(0, 1)), 1e-12 * std::max(1.0, std::abs(d.M(1, 0))));
  }
}

TEST(OmDrift, HoppingIsNotReciprocal) {
  Rng rng(52);
  for (int trial = 0; trial < 200; ++trial) {
    OmParams p = random_om(rng);
    const OmDrift d = build_om_drift(p, p.Omega);
    const double measure = std::abs(d.M(0, 1) + std::conj(d.M(1, 0)));
    const double source = p.G1 * p.G2 * mech_chi(p.Omega, p).real();
    if (source > 1e-6) {
      EXPECT_GT(measure, 0.0);
    }
    // |M12 + conj(M21)| = 2 G1 G2 Re chi.
    EXPECT_NEAR(measure, 2.0 * source, 1e-12 * std::max(1.0, source));
  }
}

TEST(MapToCascaded, DriftAndNoiseEquivalence) {
  Rng rng(53);
  for (int trial = 0; trial < 1000; ++trial) {
    const OmParams p = random_om(rng);
    const CascadedParams c = map_to_cascaded(p);
    const LinearSystem sys = build_system(c);
    const OmDrift d = build_om_drift(p, p.Omega);
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t k = 0; k < 2; ++k) EXPECT_LE(entry_error(sys.M(r, k), d.M(r, k)), 1e-12);
    const double chi_abs = std::abs(mech_chi(p.Omega, p));
    const double root_gm = std::sqrt(p.gamma_m);
    EXPECT_LE(relative_error(std::sqrt(c.gamma1), p.G1 * root_gm * chi_abs, 1e-300), 1e-12);
    EXPECT_LE(relative_error(std::sqrt(c.gamma2), p.G2 * root_gm * chi_abs, 1e-300), 1e-12);
    // The collective channel is the gauge-transformed mechanical input.
    EXPECT_LE(entry_error(sys.channels[2].u[0], d.mech_coupling[0]), 1e-12);
    EXPECT_LE(entry_error(sys.channels[2].u[1], d.mech_coupling[1]), 1e-12);
    EXPECT_EQ(c.Nbar3, p.Nbar_m);
    EXPECT_GE(c.gamma1, 0.0);
  }
}

TEST(MapToCascaded, LargeBandwidthLimit) {
  Rng rng(54);
  for (int trial = 0; trial < 100; ++trial) {
    OmParams p = random_om(rng);
    p.Omega = p.omega_m;
    const CascadedParams c = map_to_cascaded(p);
    EXPECT_LE(relative_error(c.gamma1, 4.0 * p.G1 * p.G1 / p.gamma_m, 1e-300), 1e-13);
    EXPECT_EQ(c.omega1, p.Delta1);
    EXPECT_EQ(c.omega2, p.Delta2);
  }
}

TEST(MapToCascaded, NoMechanicalLinkLeavesPlainHopping) {
  OmParams p = preset_microwave();
  p.G2 = 0.0;
  EXPECT_EQ(map_to_cascaded(p).F, Complex(p.J, 0.0));
}

TEST(MapToCascaded, OccupationsIgnoreTheMechanicalGauge) {
  Rng rng(55);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const OmParams p = random_om(rng);
    const LinearSystem sys = build_system(map_to_cascaded(p));
    if (!(stability_margin(sys.M) < -1e-3)) continue;
    std::array<ChannelSpec, 3> channels = sys.channels;
    const Complex gauge = Complex(0.0, 1.0) * std::polar(1.0, -mech_susceptibility(p.Omega, p).nu);
    channels[2].u = {gauge * channels[2].u[0], gauge * channels[2].u[1]};
    const Occupations a = occupations(steady_state(sys));
    const Occupations b = occupations(steady_state(make_linear_system(sys.M, channels)));
    EXPECT_NEAR(a.n1, b.n1, 1e-10 * std::max(1.0, a.n1));
    EXPECT_NEAR(a.n2, b.n2, 1e-10 * std::max(1.0, a.n2));
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(Design, ResidualOnRandomParameters) {
  Rng rng(56);
  for (int trial = 0; trial < 1000; ++trial) {
    OmParams p = random_om(rng);
    p.G1 += 1e-3;
    p.G2 += 1e-3;
    const NonreciprocalDesign d = design_nonreciprocal(p);
    EXPECT_LE(d.F_residual, 1e-12 * d.J_star);
    EXPECT_LE(std::abs(map_to_cascaded(apply_design(p)).F), 1e-12 * d.J_star);
    EXPECT_LE(relative_error(d.J_star, p.G1 * p.G2 * std::abs(mech_chi(p.Omega, p)), 1e-300),
              1e-15);
  }
}

TEST(Design, OnResonance) {
  OmParams p = preset_microwave();
  p.G1 = 0.3;
  p.G2 = 0.7;
  const NonreciprocalDesign d = design_nonreciprocal(p);
  EXPECT_LE(relative_error(d.J_star, 2.0 * 0.3 * 0.7 / p.gamma_m), 1e-15);
  EXPECT_NEAR(d.phi_star, kPi / 2, 1e-15);
  EXPECT_LE(d.F_residual, 1e-12 * d.J_star);
}

TEST(Design, MicrowavePreset) {
  const NonreciprocalDesign d = design_nonreciprocal(preset_microwave());
  EXPECT_LE(relative_error(d.J_star, kTwoPi * 0.98e6), 1e-12);
  // Exactly 2% off, so allow for rounding at the boundary.
  EXPECT_LE(std::abs(d.J_star - kTwoPi * 1e6) / (kTwoPi * 1e6), 0.02 * (1 + 1e-12));
}

TEST(Design, NeedsCoupling) {
  OmParams p = preset_microwave();
  p.G1 = 0.0;
  try {
    design_nonreciprocal(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoCoupling);
  }
}

TEST(Preset, Microwave) {
  const OmParams p = preset_microwave();
  EXPECT_DOUBLE_EQ(p.G1, kTwoPi * 7e3);
  EXPECT_DOUBLE_EQ(p.kappa1, kTwoPi * 2e6);
  EXPECT_DOUBLE_EQ(p.omega_m, kTwoPi * 6e6);
  EXPECT_DOUBLE_EQ(p.gamma_m, kTwoPi * 100.0);
  EXPECT_DOUBLE_EQ(p.J, kTwoPi * 1e6);
  EXPECT_EQ(p.Delta1, p.omega_m);
  EXPECT_EQ(p.Omega, p.omega_m);
  EXPECT_EQ(p.Nbar1, 0.0);
  EXPECT_EQ(p.Nbar_m, 0.5);
  EXPECT_DOUBLE_EQ(kMicrowaveCavityFrequency, kTwoPi * 5e9);
  EXPECT_NO_THROW(p.validate());

  const CascadedParams c = map_to_cascaded(p);
  EXPECT_LE(relative_error(c.gamma1, kTwoPi * 1.96e6), 1e-12);
  EXPECT_LT(stability_margin(build_system(c).M), 0.0);
  EXPECT_LT(stability_margin(build_system(map_to_cascaded(apply_design(p))).M), 0.0);
}

TEST(Validate, RejectsInconsistentLinewidths) {
  OmParams p = preset_microwave();
  p.kappa_int1 = 1.0;
  EXPECT_THROW(p.validate(), Error);
  p = preset_microwave();
  p.gamma_m = 0.0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(CavityOccupation, WeightedSum) {
  EXPECT_DOUBLE_EQ(combined_cavity_occupation(3.0, 2.0, 1.0, 10.0), (6.0 + 10.0) / 4.0);
  EXPECT_THROW(combined_cavity_occupation(0.0, 1.0, 0.0, 1.0), Error);
}

}  // namespace
}  // namespace noiseflow
