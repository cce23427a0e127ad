#include "noiseflow/counting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "noiseflow/error.hpp"

namespace noiseflow {

namespace {

const ChannelSpec& channel_of(const LinearSystem& sys, int channel) {
  if (channel < 1 || channel > 3)
    throw Error(ErrorCode::kInvalidInput, "channel must be 1, 2 or 3");
  const ChannelSpec& ch = sys.channels[static_cast<std::size_t>(channel - 1)];
  if (!(ch.rate > 0.0))
    throw Error(ErrorCode::kZeroRateChannel,
                "channel " + std::to_string(channel) + " has zero coupling rate");
  return ch;
}

// Projector onto the quadrature plane of the channel's mode.
RealMatrix4 channel_projector(const ChannelSpec& ch) {
  const EmbeddingMatrix r = real_embedding_matrix(ch.u);
  return symmetrized((1.0 / ch.rate) * (r * r.transpose()));
}

RealMatrix4 sigma_of(const CovarianceMatrix& cov) { return 2.0 * cov.V; }

double theta_from(const BiasMatrices& f, const RealMatrix4& sigma) {
  return 0.5 * ((f.Fplus * sigma).trace() - f.Fminus.trace());
}

struct TiltedProblem {
  const LinearSystem& sys;
  int channel;
  const CountingOptions& options;
  RealMatrix4 noise2 = 2.0 * sys.N;

  RealMatrix4 solve(double s, const RealMatrix4& warm) const {
    const BiasMatrices f = bias_matrices({channel, s}, sys);
    const RealMatrix4 half_minus = 0.5 * f.Fminus;
    const RealMatrix4 half_plus = 0.5 * f.Fplus;
    return solve_riccati_biased(sys.A, noise2 + half_plus, half_minus, half_plus, warm,
                                options.riccati);
  }

  // Walks from (s_from, sigma_from) to target, halving the step on failure.
  // The stabilising solution diverges where f+ of the counted channel
  // crosses zero, so the walk stops there even when theta is still finite.
  // TODO: continue through that pole with the Riccati equation for sigma^-1.
  RealMatrix4 continue_to(double target, double s_from, RealMatrix4 sigma_from,
                          double& s_reached) const {
    double s = s_from;
    RealMatrix4 sigma = sigma_from;
    double step = options.max_step;
    while (s != target) {
      const double remaining = target - s;
      const double magnitude = std::min(step, std::abs(remaining));
      const double next_s = magnitude == std::abs(remaining) ? target : s + std::copysign(magnitude, remaining);
      try {
        sigma = solve(next_s, sigma);
        s = next_s;
        step = std::min(options.max_step, 2.0 * step);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kUnstableEffectiveDrift &&
            e.code() != ErrorCode::kNoConvergence && e.code() != ErrorCode::kSingularSystem)
          throw;
        step = 0.5 * magnitude;
        if (step < options.min_step) {
          s_reached = s;
          throw OutsideAdmissibleRegion(target, s, e.what());
        }
      }
    }
    s_reached = s;
    return sigma;
  }
};

}  // namespace

std::pair<double, double> bias_factors(double rate, double Nbar, double s) {
  const double emission = (Nbar + 1.0) * std::expm1(-s);
  const double absorption = Nbar * std::expm1(s);
  return {rate * (emission + absorption), rate * (emission - absorption)};
}

BiasMatrices bias_matrices(const BiasSpec& spec, const LinearSystem& sys) {
  if (!std::isfinite(spec.s)) throw Error(ErrorCode::kInvalidInput, "s must be finite");
  const ChannelSpec& ch = channel_of(sys, spec.channel);
  const RealMatrix4 projector = channel_projector(ch);
  const auto [f_plus, f_minus] = bias_factors(ch.rate, ch.Nbar, spec.s);
  return {f_minus * projector, f_plus * projector};
}

BiasMatrices bias_derivatives(int channel, const LinearSystem& sys) {
  const ChannelSpec& ch = channel_of(sys, channel);
  const RealMatrix4 projector = channel_projector(ch);
  // f'_{j+-}(0) = -rate [Nbar (1 -+ 1) + 1]
  const double d_plus = -ch.rate;
  const double d_minus = -ch.rate * (2.0 * ch.Nbar + 1.0);
  return {d_minus * projector, d_plus * projector};
}

RealMatrix4 biased_covariance(const BiasSpec& spec, const LinearSystem& sys,
                              const CountingOptions& options) {
  channel_of(sys, spec.channel);
  const RealMatrix4 sigma0 = sigma_of(steady_state(sys));
  const TiltedProblem problem{sys, spec.channel, options};
  double reached = 0.0;
  return problem.continue_to(spec.s, 0.0, sigma0, reached);
}

double large_deviation(const BiasSpec& spec, const LinearSystem& sys,
                       const CountingOptions& options) {
  const RealMatrix4 sigma = biased_covariance(spec, sys, options);
  return theta_from(bias_matrices(spec, sys), sigma);
}

std::vector<ThetaSample> large_deviation_curve(int channel, const LinearSystem& sys,
                                               std::span<const double> s_values,
                                               const CountingOptions& options) {
  channel_of(sys, channel);
  for (double s : s_values)
    if (!std::isfinite(s)) throw Error(ErrorCode::kInvalidInput, "s must be finite");

  const RealMatrix4 sigma0 = sigma_of(steady_state(sys));
  const TiltedProblem problem{sys, channel, options};

  std::vector<std::size_t> order(s_values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(s_values[a]) < std::abs(s_values[b]); });

  std::vector<ThetaSample> out(s_values.size());
  // Independent warm-start chains for s >= 0 and s < 0.
  double last_pos = 0.0, last_neg = 0.0;
  RealMatrix4 sigma_pos = sigma0, sigma_neg = sigma0;
  for (std::size_t idx : order) {
    const double s = s_values[idx];
    double reached = 0.0;
    RealMatrix4 sigma;
    if (s >= 0.0) {
      sigma = problem.continue_to(s, last_pos, sigma_pos, reached);
      last_pos = s;
      sigma_pos = sigma;
    } else {
      sigma = problem.continue_to(s, last_neg, sigma_neg, reached);
      last_neg = s;
      sigma_neg = sigma;
    }
    out[idx] = {s, theta_from(bias_matrices({channel, s}, sys), sigma)};
  }
  return out;
}

double flow_first_moment(int channel, const LinearSystem& sys, const CovarianceMatrix& cov) {
  const BiasMatrices d = bias_derivatives(channel, sys);
  return -0.5 * ((d.Fplus * sigma_of(cov)).trace() - d.Fminus.trace());
}

std::array<double, 3> flow_first_moments(const LinearSystem& sys, const CovarianceMatrix& cov) {
  std::array<double, 3> eta{};
  for (int j = 1; j <= 3; ++j)
    eta[static_cast<std::size_t>(j - 1)] =
        sys.channels[static_cast<std::size_t>(j - 1)].rate > 0.0
            ? flow_first_moment(j, sys, cov)
            : 0.0;
  return eta;
}

std::array<double, 3> flow_first_moments(const LinearSystem& sys) {
  return flow_first_moments(sys, steady_state(sys));
}

double default_cumulant_step(int order, const CovarianceMatrix& cov) {
  const RealMatrix4 sigma = sigma_of(cov);
  double scale = 1.0;
  for (std::size_t i = 0; i < 4; ++i) scale = std::max(scale, sigma(i, i));
  return (order <= 2 ? 1e-3 : 1e-2) / scale;
}

double flow_cumulant(int channel, int order, const LinearSystem& sys, std::optional<double> step,
                     const CountingOptions& options) {
  if (order < 1 || order > 4) throw Error(ErrorCode::kInvalidInput, "order must be in 1..4");
  channel_of(sys, channel);
  const CovarianceMatrix cov = steady_state(sys);
  const double h = step.value_or(default_cumulant_step(order, cov));
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::kInvalidInput, "step must be > 0");

  const RealMatrix4 sigma0 = sigma_of(cov);
  const TiltedProblem problem{sys, channel, options};
  auto theta = [&](double s) {
    if (s == 0.0) return 0.0;
    double reached = 0.0;
    const RealMatrix4 sigma = problem.continue_to(s, 0.0, sigma0, reached);
    return theta_from(bias_matrices({channel, s}, sys), sigma);
  };

  auto central = [&](double hh) {
    switch (order) {
      case 1:
        return (theta(hh) - theta(-hh)) / (2.0 * hh);
      case 2:
        return (theta(hh) + theta(-hh)) / (hh * hh);
      case 3:
        return (theta(2.0 * hh) - 2.0 * theta(hh) + 2.0 * theta(-hh) - theta(-2.0 * hh)) /
               (2.0 * hh * hh * hh);
      default:
        return (theta(2.0 * hh) - 4.0 * theta(hh) - 4.0 * theta(-hh) + theta(-2.0 * hh)) /
               (hh * hh * hh * hh);
    }
  };

  const double coarse = central(h);
  const double fine = central(0.5 * h);
  const double derivative = (4.0 * fine - coarse) / 3.0;
  return order % 2 == 0 ? derivative : -derivative;
}

std::array<double, 3> simplified_flows(const CascadedParams& p) {
  p.validate();
  if (!p.equal_rates() || p.F != Complex{})
    throw Error(ErrorCode::kUnsupportedParams, "simplified flows need equal rates and F = 0");
  const double k = p.kappa1;
  const double d = p.detuning();
  const double lorentz = 2.0 * k * k / (4.0 * k * k + d * d);
  const double n1 = p.Nbar1, n2 = p.Nbar2, n3 = p.Nbar3;
  return {k * (n3 - n1), k * (lorentz * (n1 - n3) + (n3 - n2)),
          k * (lorentz * (n3 - n1) + (n1 - n3) + (n2 - n3))};
}

FlowStats flow_stats(int channel, const LinearSystem& sys, std::span<const double> s_values,
                     int max_order, const CountingOptions& options) {
  FlowStats stats;
  stats.theta_samples = large_deviation_curve(channel, sys, s_values, options);
  stats.eta = flow_first_moments(sys);
  for (int n = 1; n <= max_order; ++n)
    stats.cumulants.push_back(flow_cumulant(channel, n, sys, std::nullopt, options));
  return stats;
}

}  // namespace noiseflow
