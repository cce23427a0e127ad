#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "noiseflow/cascaded.hpp"
#include "noiseflow/error.hpp"
#include "test_support.hpp"

namespace noiseflow {
namespace {

using testing::relative_error;
using testing::Rng;
using testing::to_eigen;

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidInput;
}

CascadedParams baseline_point(double detuning, double nbar3) {
  // kappa = 1, m1 = 50, m2 = 100 expressed through the bath occupations.
  return CascadedParams::equal_rate(1.0, detuning, 0.0, 0.0, 100.0 - nbar3, 200.0 - nbar3, nbar3);
}

TEST(BuildSystem, NonreciprocalDriftIsLowerTriangular) {
  const double kappa = 0.7;
  const LinearSystem sys = build_system(CascadedParams::equal_rate(kappa, 0.4, 0.0, 0.0, 1, 2, 3));
  EXPECT_EQ(sys.M(0, 1), Complex{});
  EXPECT_NEAR(std::abs(sys.M(1, 0) - Complex(-kappa, 0.0)), 0.0, 1e-15);
  EXPECT_EQ(sys.M(0, 0), Complex(-kappa, 0.0));
  EXPECT_EQ(sys.M(1, 1), Complex(-kappa, -0.4));
}

TEST(BuildSystem, ClosedSystemHasNoNoise) {
  CascadedParams p;
  p.omega1 = 1.5;
  p.omega2 = -0.5;
  p.Nbar1 = 4.0;
  const LinearSystem sys = build_system(p);
  EXPECT_EQ(sys.M(0, 0), Complex(0.0, -1.5));
  EXPECT_EQ(sys.M(1, 1), Complex(0.0, 0.5));
  EXPECT_EQ(sys.M(0, 1), Complex{});
  EXPECT_EQ(sys.M(1, 0), Complex{});
  EXPECT_EQ(sys.N.max_abs(), 0.0);
}

TEST(BuildSystem, SingleLocalBathNoise) {
  CascadedParams p;
  p.kappa1 = 0.3;
  p.Nbar1 = 2.0;
  const LinearSystem sys = build_system(p);
  RealMatrix4 want;
  want(0, 0) = want(1, 1) = (2.0 + 0.5) * 0.3;
  EXPECT_LE((sys.N - want).max_abs(), 1e-15);
}

TEST(BuildSystem, ChannelVectorsAndRates) {
  CascadedParams p;
  p.kappa1 = 0.5;
  p.kappa2 = 0.25;
  p.gamma1 = 0.09;
  p.gamma2 = 0.16;
  p.phi = 0.3;
  const LinearSystem sys = build_system(p);
  EXPECT_DOUBLE_EQ(sys.channels[2].rate, 0.25);
  EXPECT_NEAR(std::abs(sys.channels[2].u[1] - 0.4 * std::polar(1.0, 0.3)), 0.0, 1e-15);
  for (const ChannelSpec& ch : sys.channels)
    EXPECT_NEAR(std::norm(ch.u[0]) + std::norm(ch.u[1]), ch.rate, 1e-15);
}

TEST(BuildSystem, RejectsNegativeInputs) {
  CascadedParams p = CascadedParams::equal_rate(1.0, 0.0, 0.0, 0.0, 1, 1, 1);
  p.gamma2 = -1e-3;
  EXPECT_EQ(code_of([&] { build_system(p); }), ErrorCode::kInvalidParams);
  p.gamma2 = 1.0;
  p.Nbar3 = -1.0;
  EXPECT_EQ(code_of([&] { build_system(p); }), ErrorCode::kInvalidParams);
}

TEST(SteadyState, VacuumForColdBaths) {
  Rng rng(30);
  for (int trial = 0; trial < 50; ++trial) {
    CascadedParams p = rng.stable_general_params();
    p.Nbar1 = p.Nbar2 = p.Nbar3 = 0.0;
    EXPECT_LE((steady_state(p).V - 0.5 * RealMatrix4::identity()).max_abs(), 1e-12);
  }
}

TEST(SteadyState, GlobalEquilibrium) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    CascadedParams p = rng.stable_general_params();
    p.Nbar1 = p.Nbar2 = p.Nbar3 = 7.0;
    const Occupations n = occupations(steady_state(p));
    EXPECT_NEAR(n.n1, 7.0, 1e-10);
    EXPECT_NEAR(n.n2, 7.0, 1e-10);
  }
}

TEST(SteadyState, ResonantNonreciprocalExample) {
  const Occupations n = occupations(steady_state(baseline_point(0.0, 0.0)));
  EXPECT_NEAR(n.n1, 50.0, 1e-10);
  EXPECT_NEAR(n.n2, 125.0, 1e-10);
}

TEST(SteadyState, UnstableDriftIsReported) {
  CascadedParams p;
  p.kappa1 = 1.0;  // mode 2 undamped
  EXPECT_EQ(code_of([&] { steady_state(p); }), ErrorCode::kUnstable);
}

TEST(SteadyState, VacuumFloorAndSymmetry) {
  Rng rng(32);
  for (int trial = 0; trial < 500; ++trial) {
    const CovarianceMatrix cov = steady_state(rng.stable_general_params());
    EXPECT_LE(asymmetry(cov.V), 1e-12 * std::max(1.0, cov.V.max_abs()));
    const auto ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(to_eigen(cov.V)).eigenvalues();
    EXPECT_GE(ev.minCoeff(), 0.5 - 1e-9);
  }
}

TEST(Occupations, FromCovariance) {
  Occupations n = occupations({0.5 * RealMatrix4::identity()});
  EXPECT_EQ(n.n1, 0.0);
  EXPECT_EQ(n.n2, 0.0);
  EXPECT_FALSE(n.clamped);

  RealMatrix4 v = 0.5 * RealMatrix4::identity();
  v(0, 0) = v(1, 1) = 5.5;
  n = occupations({v});
  EXPECT_EQ(n.n1, 5.0);
  EXPECT_EQ(n.n2, 0.0);

  v(2, 2) = 0.5 - 1e-10;
  n = occupations({v});
  EXPECT_EQ(n.n2, 0.0);
  EXPECT_TRUE(n.clamped);
}

TEST(ClosedForm, NonreciprocalLimit) {
  Rng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    CascadedParams p = rng.equal_rate_params();
    p.F = 0.0;
    const double k = p.kappa1, d = p.detuning();
    const Occupations n = closed_form_occupations(p);
    EXPECT_LE(relative_error(n.n1, 0.5 * (p.Nbar1 + p.Nbar3)), 1e-13);
    EXPECT_LE(relative_error(n.n2, 0.5 * (p.Nbar2 + p.Nbar3) +
                                       k * k * (p.Nbar1 - p.Nbar3) / (4 * k * k + d * d)),
              1e-13);
  }
}

TEST(ClosedForm, ResonantNonreciprocal) {
  const CascadedParams p = CascadedParams::equal_rate(2.0, 0.0, 0.0, 0.4, 10.0, 3.0, 6.0);
  EXPECT_NEAR(closed_form_occupations(p).n2, 0.25 * (10.0 + 2 * 3.0 + 6.0), 1e-13);
}

TEST(ClosedForm, EquilibriumForAnyF) {
  Rng rng(34);
  for (int trial = 0; trial < 500; ++trial) {
    CascadedParams p = rng.equal_rate_params();
    p.Nbar1 = p.Nbar2 = p.Nbar3 = 42.0;
    const Occupations n = closed_form_occupations(p);
    EXPECT_NEAR(n.n1, 42.0, 1e-10);
    EXPECT_NEAR(n.n2, 42.0, 1e-10);
    const OccupationReport r = delta_n(p);
    EXPECT_NEAR(r.n1, 42.0, 1e-10);
    EXPECT_NEAR(r.n2, 42.0, 1e-10);
  }
}

TEST(ClosedForm, MatchesLyapunovOnRandomDraws) {
  Rng rng(35);
  for (int trial = 0; trial < 1000; ++trial) {
    const CascadedParams p = rng.stable_equal_rate_params();
    const Occupations numeric = occupations(steady_state(p));
    const Occupations closed = closed_form_occupations(p);
    EXPECT_LE(relative_error(numeric.n1, closed.n1, 1e-3), 1e-8) << trial;
    EXPECT_LE(relative_error(numeric.n2, closed.n2, 1e-3), 1e-8) << trial;
  }
}

TEST(ClosedForm, RejectsUnequalRates) {
  CascadedParams p = CascadedParams::equal_rate(1.0, 0.0, 0.0, 0.0, 1, 1, 1);
  p.gamma2 = 1.1;
  EXPECT_EQ(code_of([&] { closed_form_occupations(p); }), ErrorCode::kUnsupportedParams);
  EXPECT_EQ(code_of([&] { disconnected_baseline(p); }), ErrorCode::kUnsupportedParams);
  EXPECT_EQ(code_of([&] { delta_n(p); }), ErrorCode::kUnsupportedParams);
}

TEST(Baseline, Examples) {
  const auto [m1, m2] = disconnected_baseline(CascadedParams::equal_rate(1, 0, 0, 0, 100, 200, 0));
  EXPECT_EQ(m1, 50.0);
  EXPECT_EQ(m2, 100.0);
  const auto [z1, z2] = disconnected_baseline(CascadedParams::equal_rate(1, 0, 0.3, 0, 0, 0, 0));
  EXPECT_EQ(z1, 0.0);
  EXPECT_EQ(z2, 0.0);
}

TEST(Baseline, LargeDetuningLimitOfLyapunov) {
  Rng rng(36);
  for (int trial = 0; trial < 50; ++trial) {
    CascadedParams p = rng.stable_equal_rate_params();
    p.omega1 = 0.0;
    p.omega2 = 1e8 * p.kappa1;
    if (!(stability_margin(build_system(p).M) < 0.0)) continue;
    const Occupations n = occupations(steady_state(p));
    const auto [m1, m2] = disconnected_baseline(p);
    EXPECT_LE(relative_error(n.n1, m1), 1e-6);
    EXPECT_LE(relative_error(n.n2, m2), 1e-6);
  }
}

TEST(DeltaN, NonreciprocalExamples) {
  // m1 = m3 closes the flow for every detuning.
  for (double d : {-7.0, 0.0, 0.3, 12.0}) {
    const OccupationReport r = delta_n(CascadedParams::equal_rate(1.0, d, 0.0, 0.0, 30, 80, 30));
    EXPECT_EQ(r.dn1, 0.0);
    EXPECT_EQ(r.dn2, 0.0);
  }
  const OccupationReport r = delta_n(baseline_point(0.0, 0.0));
  EXPECT_NEAR(r.dn2, 25.0, 1e-12);
  const OccupationReport numeric = delta_n(baseline_point(0.0, 0.0), OccupationMethod::kLyapunov);
  EXPECT_NEAR(numeric.dn2, 25.0, 1e-9);
}

TEST(DeltaN, BaselineAndBathFormsAgree) {
  Rng rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    CascadedParams p = rng.equal_rate_params();
    p.F = 0.0;
    EXPECT_LE(relative_error(nonreciprocal_dn2_from_baselines(p), nonreciprocal_dn2_from_baths(p)),
              1e-13);
  }
}

TEST(DeltaN, ReportIsConsistent) {
  Rng rng(38);
  for (int trial = 0; trial < 200; ++trial) {
    const CascadedParams p = rng.stable_equal_rate_params();
    for (OccupationMethod method : {OccupationMethod::kClosedForm, OccupationMethod::kLyapunov}) {
      const OccupationReport r = delta_n(p, method);
      EXPECT_NEAR(r.dn1, r.n1 - r.m1, 1e-12 * std::max(1.0, r.n1));
      EXPECT_NEAR(r.dn2, r.n2 - r.m2, 1e-12 * std::max(1.0, r.n2));
    }
  }
}

TEST(DeltaN, GeneralFormulasMatchLyapunov) {
  Rng rng(39);
  for (int trial = 0; trial < 1000; ++trial) {
    const CascadedParams p = rng.stable_equal_rate_params();
    const OccupationReport closed = delta_n(p, OccupationMethod::kClosedForm);
    const OccupationReport numeric = delta_n(p, OccupationMethod::kLyapunov);
    const double scale = std::max({1.0, p.Nbar1, p.Nbar2, p.Nbar3});
    EXPECT_NEAR(closed.dn1, numeric.dn1, 1e-9 * scale) << trial;
    EXPECT_NEAR(closed.dn2, numeric.dn2, 1e-9 * scale) << trial;
    // The closed-form report is self-consistent with closed_form_occupations.
    const Occupations n = closed_form_occupations(p);
    EXPECT_NEAR(closed.n1, n.n1, 1e-9 * scale);
    EXPECT_NEAR(closed.n2, n.n2, 1e-9 * scale);
  }
}

TEST(Nonreciprocal, ModeOneIgnoresBathTwo) {
  Rng rng(40);
  for (int trial = 0; trial < 200; ++trial) {
    CascadedParams p = rng.stable_equal_rate_params();
    p.F = 0.0;
    CascadedParams q = p;
    q.Nbar2 += 1.0;
    EXPECT_NEAR(occupations(steady_state(q)).n1 - occupations(steady_state(p)).n1, 0.0,
                1e-10 * std::max(1.0, p.Nbar1 + p.Nbar3));
  }
}

TEST(Nonreciprocal, SignLawAndLorentzian) {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    CascadedParams p = rng.equal_rate_params();
    p.F = 0.0;
    const double k = p.kappa1;
    const double expected = (p.Nbar1 - p.Nbar3) * k * k;
    for (double d : {-15.0, -1.0, 0.0, 2.5, 40.0}) {
      p.omega2 = p.omega1 + d * k;
      const OccupationReport r = delta_n(p, OccupationMethod::kLyapunov);
      const double weighted = r.dn2 * (4 * k * k + d * d * k * k);
      EXPECT_NEAR(weighted, expected, 1e-9 * std::max(1.0, std::abs(expected)) * (4 + d * d));
      if (std::abs(p.Nbar1 - p.Nbar3) > 1e-6) {
        EXPECT_EQ(r.dn2 > 0.0, p.Nbar1 > p.Nbar3);
      }
    }
  }
}

TEST(Temperature, ConversionExamples) {
  EXPECT_EQ(occupation_from_temperature(0.0, 1.0, 1.0), 0.0);
  EXPECT_NEAR(occupation_from_temperature(1.0 / std::log(2.0), 1.0, 1.0), 1.0, 1e-15);
  for (double n : {0.1, 1.0, 100.0}) {
    const double t = temperature_from_occupation(n, 2.0, 0.3);
    EXPECT_LE(relative_error(occupation_from_temperature(t, 2.0, 0.3), n), 1e-12);
  }
  EXPECT_EQ(code_of([] { occupation_from_temperature(-1.0, 1.0, 1.0); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([] { occupation_from_temperature(1.0, 0.0, 1.0); }), ErrorCode::kInvalidInput);
}

}  // namespace
}  // namespace noiseflow
