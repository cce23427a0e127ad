#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "noiseflow/cascaded.hpp"
#include "noiseflow/counting.hpp"
#include "noiseflow/error.hpp"
#include "noiseflow/optomech.hpp"
#include "noiseflow/sweep.hpp"

namespace noiseflow::cli {

namespace {

using Json = nlohmann::ordered_json;

struct PointOptions {
  std::string model = "cascaded";
  std::string preset;
  bool nonreciprocal = false;
  std::vector<std::string> params;
};

void add_point_options(CLI::App* cmd, PointOptions& opts, bool with_model) {
  if (with_model)
    cmd->add_option("--model", opts.model, "cascaded or optomech")
        ->check(CLI::IsMember({"cascaded", "optomech"}));
  cmd->add_option("--preset", opts.preset, "start from a preset (optomech: microwave)")
      ->check(CLI::IsMember({"microwave"}));
  cmd->add_flag("--nonreciprocal", opts.nonreciprocal, "apply the J, phi design (optomech)");
  cmd->add_option("--param", opts.params, "NAME=VALUE, repeatable");
}

SweepConfig point_from(const PointOptions& opts, bool force_optomech) {
  std::map<std::string, double> values;
  for (const std::string& item : opts.params) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw SchemaError("--param " + item, "expected NAME=VALUE");
    const std::string name = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    double value = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end)
      throw SchemaError("--param " + name, "not a number: " + text);
    values[name] = value;
  }
  const bool optomech = force_optomech || opts.model == "optomech" || !opts.preset.empty() ||
                        opts.nonreciprocal;
  return point_config(optomech ? ModelKind::kOptomech : ModelKind::kCascaded, values,
                      !opts.preset.empty(), opts.nonreciprocal);
}

Json cascaded_json(const CascadedParams& p) {
  Json j;
  j["omega1"] = p.omega1;
  j["omega2"] = p.omega2;
  j["kappa1"] = p.kappa1;
  j["kappa2"] = p.kappa2;
  j["gamma1"] = p.gamma1;
  j["gamma2"] = p.gamma2;
  j["phi"] = p.phi;
  j["F_re"] = p.F.real();
  j["F_im"] = p.F.imag();
  j["Nbar1"] = p.Nbar1;
  j["Nbar2"] = p.Nbar2;
  j["Nbar3"] = p.Nbar3;
  return j;
}

Json om_json(const OmParams& p) {
  Json j;
  j["omega_m"] = p.omega_m;
  j["gamma_m"] = p.gamma_m;
  j["Delta1"] = p.Delta1;
  j["Delta2"] = p.Delta2;
  j["kappa1"] = p.kappa1;
  j["kappa2"] = p.kappa2;
  j["kappa_int1"] = p.kappa_int1;
  j["kappa_ext1"] = p.kappa_ext1;
  j["kappa_int2"] = p.kappa_int2;
  j["kappa_ext2"] = p.kappa_ext2;
  j["J"] = p.J;
  j["phi"] = p.phi;
  j["G1"] = p.G1;
  j["G2"] = p.G2;
  j["Omega"] = p.Omega;
  j["Nbar1"] = p.Nbar1;
  j["Nbar2"] = p.Nbar2;
  j["Nbar_m"] = p.Nbar_m;
  return j;
}

int steady_state_command(const PointOptions& opts, std::ostream& out) {
  const SweepConfig cfg = point_from(opts, false);
  const CascadedParams p = resolve_point(cfg, {});
  const LinearSystem sys = build_system(p);
  const CovarianceMatrix cov = steady_state(sys);
  const Occupations n = occupations(cov);
  const auto eta = flow_first_moments(sys, cov);

  Json j;
  j["params"] = cascaded_json(p);
  j["stability_margin"] = stability_margin(sys.M);
  j["n1"] = n.n1;
  j["n2"] = n.n2;
  j["clamped"] = n.clamped;
  j["eta"] = {eta[0], eta[1], eta[2]};
  if (p.equal_rates()) {
    const OccupationReport numeric = delta_n(p, OccupationMethod::kLyapunov);
    const OccupationReport closed = delta_n(p, OccupationMethod::kClosedForm);
    const Occupations cf = closed_form_occupations(p);
    j["m1"] = numeric.m1;
    j["m2"] = numeric.m2;
    j["dn1"] = numeric.dn1;
    j["dn2"] = numeric.dn2;
    j["closed_form"] = {{"n1", cf.n1}, {"n2", cf.n2}, {"dn1", closed.dn1}, {"dn2", closed.dn2}};
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

struct SweepOptions {
  std::string config_path;
  std::string format;
  std::string out_path;
  bool parallel = false;
};

int sweep_command(const SweepOptions& opts, std::ostream& out) {
  std::ifstream in(opts.config_path, std::ios::binary);
  if (!in) throw SchemaError(opts.config_path, "cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  SweepConfig cfg = parse_config(text.str());
  if (opts.format == "csv") cfg.format = OutputFormat::kCsv;
  if (opts.format == "json") cfg.format = OutputFormat::kJson;
  if (opts.parallel) cfg.parallel = true;

  const std::string bytes = emit(cfg, run_sweep(cfg), cfg.format);
  if (opts.out_path.empty()) {
    out << bytes;
    return kExitOk;
  }
  std::ofstream file(opts.out_path, std::ios::binary | std::ios::trunc);
  if (!file) throw SchemaError(opts.out_path, "cannot open output file");
  file << bytes;
  if (!file.flush()) throw SchemaError(opts.out_path, "write failed");
  return kExitOk;
}

struct FcsOptions {
  PointOptions point;
  int channel = 1;
  double s_min = -0.5;
  double s_max = 0.5;
  int s_points = 11;
  int max_order = 4;
};

int fcs_command(const FcsOptions& opts, std::ostream& out) {
  if (opts.s_points < 1) throw SchemaError("--s-points", "must be at least 1");
  if (!(std::isfinite(opts.s_min) && std::isfinite(opts.s_max)))
    throw SchemaError("--s-min/--s-max", "must be finite");
  const SweepConfig cfg = point_from(opts.point, false);
  const CascadedParams p = resolve_point(cfg, {});
  const LinearSystem sys = build_system(p);

  SweepAxis grid{"s", opts.s_min, opts.s_points == 1 ? opts.s_min : opts.s_max, opts.s_points,
                 Spacing::kLinear};
  const std::vector<double> s_values = grid.values();
  const FlowStats stats = flow_stats(opts.channel, sys, s_values, opts.max_order);

  Json j;
  j["channel"] = opts.channel;
  Json theta = Json::array();
  for (const ThetaSample& t : stats.theta_samples) theta.push_back({{"s", t.s}, {"theta", t.theta}});
  j["theta"] = std::move(theta);
  j["eta"] = {stats.eta[0], stats.eta[1], stats.eta[2]};
  j["cumulants"] = stats.cumulants;
  out << j.dump(2) << '\n';
  return kExitOk;
}

int map_om_command(const PointOptions& opts, std::ostream& out) {
  const SweepConfig cfg = point_from(opts, true);
  const OmParams om = resolve_optomech(cfg, {});
  const CascadedParams p = map_to_cascaded(om);
  Json j;
  j["optomech"] = om_json(om);
  j["cascaded"] = cascaded_json(p);
  j["F_residual"] = std::abs(p.F);
  out << j.dump(2) << '\n';
  return kExitOk;
}

int design_command(const PointOptions& opts, std::ostream& out) {
  const SweepConfig cfg = point_from(opts, true);
  const NonreciprocalDesign d = design_nonreciprocal(resolve_optomech(cfg, {}));
  Json j;
  j["J_star"] = d.J_star;
  j["phi_star"] = d.phi_star;
  j["F_residual"] = d.F_residual;
  out << j.dump(2) << '\n';
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnstable:
    case ErrorCode::kUnsupportedParams:
    case ErrorCode::kNoConvergence:
    case ErrorCode::kSingularSystem:
    case ErrorCode::kUnstableEffectiveDrift:
    case ErrorCode::kOutsideAdmissibleRegion:
    case ErrorCode::kNonSymmetricInput:
      return kExitNumerical;
    default:
      return kExitConfig;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Thermal noise flow in cascaded and optomechanical oscillator pairs"};
  app.name("noiseflow");
  app.require_subcommand(1);

  PointOptions steady_opts;
  CLI::App* steady = app.add_subcommand("steady-state", "occupations at a single point");
  add_point_options(steady, steady_opts, true);

  SweepOptions sweep_opts;
  CLI::App* sweep = app.add_subcommand("sweep", "evaluate a parameter grid from a JSON config");
  sweep->add_option("config", sweep_opts.config_path, "config file")->required();
  sweep->add_option("--format", sweep_opts.format, "csv or json (overrides the config)")
      ->check(CLI::IsMember({"csv", "json"}));
  sweep->add_option("--out", sweep_opts.out_path, "write to this file instead of stdout");
  sweep->add_flag("--parallel", sweep_opts.parallel, "evaluate grid points on several threads");

  FcsOptions fcs_opts;
  CLI::App* fcs = app.add_subcommand("fcs", "counting statistics of one bath channel");
  add_point_options(fcs, fcs_opts.point, true);
  fcs->add_option("--channel", fcs_opts.channel, "1, 2 or 3")->check(CLI::Range(1, 3));
  fcs->add_option("--s-min", fcs_opts.s_min, "lowest counting field");
  fcs->add_option("--s-max", fcs_opts.s_max, "highest counting field");
  fcs->add_option("--s-points", fcs_opts.s_points, "number of s samples");
  fcs->add_option("--max-order", fcs_opts.max_order, "cumulants 1..n (0 to skip)")
      ->check(CLI::Range(0, 4));

  PointOptions map_opts;
  CLI::App* map_om = app.add_subcommand("map-om", "optomechanical to cascaded parameters");
  add_point_options(map_om, map_opts, false);

  PointOptions design_opts;
  CLI::App* design = app.add_subcommand("design", "J and phi that cancel the back hopping");
  add_point_options(design, design_opts, false);

  std::string preset_name;
  CLI::App* preset = app.add_subcommand("preset", "print a parameter preset");
  preset->add_option("name", preset_name, "microwave")
      ->required()
      ->check(CLI::IsMember({"microwave"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*steady) return steady_state_command(steady_opts, out);
    if (*sweep) return sweep_command(sweep_opts, out);
    if (*fcs) return fcs_command(fcs_opts, out);
    if (*map_om) return map_om_command(map_opts, out);
    if (*design) return design_command(design_opts, out);
    if (*preset) {
      Json j = om_json(preset_microwave());
      j["cavity_frequency"] = kMicrowaveCavityFrequency;
      out << j.dump(2) << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace noiseflow::cli
