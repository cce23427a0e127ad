#pragma once

// Full counting statistics of the excitations exchanged between the two
// oscillators and one of their three baths.
//
// Conventions:
//  * All matrices here use the symmetrised covariance sigma = 2 V (vacuum =
//    identity) and the matching noise matrix 2 N. In this normalisation the
//    trace formula for the mean flow vanishes at global equilibrium.
//  * theta(s) = 1/2 Tr{F+(s) sigma_s - F-(s)} and eta^(n) = (-1)^n d^n theta/ds^n
//    at s = 0. On this scale eta_j = 2 (mean excitation current into bath j);
//    a positive eta_j means bath j absorbs excitations on average.
//  * sigma_s is the covariance of the s-tilted Gaussian dynamics. It solves
//      0 = (A - F-/2) sigma + sigma (A - F-/2)^T + sigma (F+/2) sigma + 2N + F+/2,
//    which follows from applying Wick's theorem to the tilted jump terms.

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "noiseflow/cascaded.hpp"
#include "noiseflow/linalg.hpp"

namespace noiseflow {

struct BiasSpec {
  /// 1 and 2 are the local baths, 3 the shared one.
  int channel = 1;
  double s = 0.0;
};

struct BiasMatrices {
  RealMatrix4 Fminus;
  RealMatrix4 Fplus;
};

struct ThetaSample {
  double s = 0.0;
  double theta = 0.0;
};

struct FlowStats {
  std::vector<ThetaSample> theta_samples;
  /// First moments of all three channels from the trace formula.
  std::array<double, 3> eta{};
  /// eta^(1..n) of the counted channel from finite differences of theta.
  std::vector<double> cumulants;
};

struct CountingOptions {
  /// Largest continuation step in s.
  double max_step = 0.05;
  /// Continuation gives up once a step has been halved below this.
  double min_step = 1e-7;
  RiccatiOptions riccati{};
};

/// f_{j+}(s) and f_{j-}(s) for a bath of the given rate and occupation.
std::pair<double, double> bias_factors(double rate, double Nbar, double s);

/// F+-(s) = f_{j+-}(s) R(u_j) R(u_j)^T / |u_j|^2. Throws kZeroRateChannel.
BiasMatrices bias_matrices(const BiasSpec& spec, const LinearSystem& sys);

/// dF+-/ds at s = 0.
BiasMatrices bias_derivatives(int channel, const LinearSystem& sys);

/// sigma_s reached by warm-started continuation from s = 0.
RealMatrix4 biased_covariance(const BiasSpec& spec, const LinearSystem& sys,
                              const CountingOptions& options = {});

double large_deviation(const BiasSpec& spec, const LinearSystem& sys,
                       const CountingOptions& options = {});

/// theta on a grid, continuing outward from s = 0 in each direction.
/// Samples come back in the order of `s_values`.
std::vector<ThetaSample> large_deviation_curve(int channel, const LinearSystem& sys,
                                               std::span<const double> s_values,
                                               const CountingOptions& options = {});

/// eta_j = -1/2 Tr{F+' sigma - F-'} with sigma = 2 V.
double flow_first_moment(int channel, const LinearSystem& sys, const CovarianceMatrix& cov);

std::array<double, 3> flow_first_moments(const LinearSystem& sys, const CovarianceMatrix& cov);
std::array<double, 3> flow_first_moments(const LinearSystem& sys);

/// Step used by flow_cumulant when none is given: 1e-3 for n <= 2 and 1e-2
/// for n = 3, 4, divided by the largest diagonal entry of sigma (at least 1).
double default_cumulant_step(int order, const CovarianceMatrix& cov);

/// eta^(n) for 1 <= n <= 4 from central differences of theta with one
/// Richardson step (h and h/2).
double flow_cumulant(int channel, int order, const LinearSystem& sys,
                     std::optional<double> step = std::nullopt,
                     const CountingOptions& options = {});

/// Equal-rate, F = 0 closed forms of the three mean flows, evaluated with
/// the bath occupations Nbar_j.
std::array<double, 3> simplified_flows(const CascadedParams& p);

FlowStats flow_stats(int channel, const LinearSystem& sys, std::span<const double> s_values,
                     int max_order, const CountingOptions& options = {});

}  // namespace noiseflow
