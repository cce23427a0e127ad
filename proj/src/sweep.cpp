#include "noiseflow/sweep.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>
#include <utility>

#include "json.hpp"

#include "noiseflow/cascaded.hpp"
#include "noiseflow/counting.hpp"
#include "noiseflow/optomech.hpp"

namespace noiseflow {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxGridPoints = 10'000'000;

const std::set<std::string, std::less<>> kCascadedNames = {
    "omega1", "omega2", "kappa1", "kappa2", "gamma1", "gamma2", "phi",  "F_re", "F_im", "Nbar1",
    "Nbar2",  "Nbar3",  "kappa",  "Delta",  "F",      "F_phase", "m1",  "m2",   "m3"};

const std::set<std::string, std::less<>> kOmNames = {
    "omega_m",    "gamma_m",    "Delta1",     "Delta2", "kappa1", "kappa2", "kappa_int1",
    "kappa_ext1", "kappa_int2", "kappa_ext2", "J",      "phi",    "G1",     "G2",
    "Omega",      "Nbar1",      "Nbar2",      "Nbar_m"};

const std::set<std::string, std::less<>> kPlainOutputs = {
    "n1",    "n2",      "m1",      "m2",      "dn1",     "dn2",
    "eta1",  "eta2",    "eta3",    "n1_cf",   "n2_cf",   "dn1_cf",
    "dn2_cf", "eta1_cf", "eta2_cf", "eta3_cf", "stability_margin", "F_residual"};

// Parsed form of a single output column.
struct OutputSpec {
  enum class Kind { kPlain, kTheta, kFlowDerivative } kind = Kind::kPlain;
  std::string name;
  int channel = 0;
  int bath = 0;
  double s = 0.0;
};

bool parse_full_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

std::optional<OutputSpec> parse_output(const std::string& name) {
  OutputSpec spec;
  spec.name = name;
  if (kPlainOutputs.contains(name)) return spec;
  // theta<j>@<s>
  if (name.size() > 7 && name.starts_with("theta") && name[6] == '@' && name[5] >= '1' &&
      name[5] <= '3') {
    spec.kind = OutputSpec::Kind::kTheta;
    spec.channel = name[5] - '0';
    if (!parse_full_double(std::string_view(name).substr(7), spec.s)) return std::nullopt;
    return spec;
  }
  // deta<i>_dNbar<j>
  if (name.size() == 12 && name.starts_with("deta") && name.substr(5, 6) == "_dNbar" &&
      name[4] >= '1' && name[4] <= '3' && name[11] >= '1' && name[11] <= '3') {
    spec.kind = OutputSpec::Kind::kFlowDerivative;
    spec.channel = name[4] - '0';
    spec.bath = name[11] - '0';
    return spec;
  }
  return std::nullopt;
}

std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

double require_number(const json& node, const std::string& path) {
  if (!node.is_number()) throw SchemaError(path, "expected a number");
  const double v = node.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "expected a finite number");
  return v;
}

std::string require_string(const json& node, const std::string& path) {
  if (!node.is_string()) throw SchemaError(path, "expected a string");
  return node.get<std::string>();
}

// ---- parameter resolution -------------------------------------------------

using Values = std::map<std::string, double, std::less<>>;

double get(const Values& v, std::string_view key, double fallback = 0.0) {
  const auto it = v.find(key);
  return it == v.end() ? fallback : it->second;
}

bool has(const Values& v, std::string_view key) { return v.find(key) != v.end(); }

CascadedParams resolve_cascaded(const Values& v) {
  CascadedParams p;
  p.omega1 = get(v, "omega1");
  p.omega2 = has(v, "Delta") ? p.omega1 + get(v, "Delta") : get(v, "omega2");
  if (has(v, "kappa")) {
    p.kappa1 = p.kappa2 = p.gamma1 = p.gamma2 = get(v, "kappa");
  } else {
    p.kappa1 = get(v, "kappa1");
    p.kappa2 = get(v, "kappa2");
    p.gamma1 = get(v, "gamma1");
    p.gamma2 = get(v, "gamma2");
  }
  p.phi = get(v, "phi");
  if (has(v, "F") || has(v, "F_phase"))
    p.F = get(v, "F") * std::polar(1.0, get(v, "F_phase"));
  else
    p.F = Complex(get(v, "F_re"), get(v, "F_im"));
  if (has(v, "m3")) {
    const double m3 = get(v, "m3");
    p.Nbar1 = 2.0 * get(v, "m1") - m3;
    p.Nbar2 = 2.0 * get(v, "m2") - m3;
    p.Nbar3 = m3;
    if (p.Nbar1 < 0.0 || p.Nbar2 < 0.0 || p.Nbar3 < 0.0)
      throw Error(ErrorCode::kNegativeOccupation,
                  "2 m_i - m3 must be non-negative (got Nbar1 = " + format_double(p.Nbar1) +
                      ", Nbar2 = " + format_double(p.Nbar2) + ")");
  } else {
    p.Nbar1 = get(v, "Nbar1");
    p.Nbar2 = get(v, "Nbar2");
    p.Nbar3 = get(v, "Nbar3");
  }
  return p;
}

OmParams resolve_om(const SweepConfig& cfg, const Values& v) {
  OmParams p = cfg.preset_microwave ? preset_microwave() : OmParams{};
  auto assign = [&](std::string_view key, double& field) {
    if (has(v, key)) field = get(v, key);
  };
  assign("omega_m", p.omega_m);
  assign("gamma_m", p.gamma_m);
  assign("Delta1", p.Delta1);
  assign("Delta2", p.Delta2);
  assign("kappa_int1", p.kappa_int1);
  assign("kappa_ext1", p.kappa_ext1);
  assign("kappa_int2", p.kappa_int2);
  assign("kappa_ext2", p.kappa_ext2);
  assign("J", p.J);
  assign("phi", p.phi);
  assign("G1", p.G1);
  assign("G2", p.G2);
  assign("Omega", p.Omega);
  assign("Nbar1", p.Nbar1);
  assign("Nbar2", p.Nbar2);
  assign("Nbar_m", p.Nbar_m);
  // A bare total linewidth goes to the external port.
  if (has(v, "kappa1")) {
    p.kappa1 = get(v, "kappa1");
    if (!has(v, "kappa_ext1")) p.kappa_ext1 = p.kappa1 - p.kappa_int1;
  } else {
    p.kappa1 = p.kappa_int1 + p.kappa_ext1;
  }
  if (has(v, "kappa2")) {
    p.kappa2 = get(v, "kappa2");
    if (!has(v, "kappa_ext2")) p.kappa_ext2 = p.kappa2 - p.kappa_int2;
  } else {
    p.kappa2 = p.kappa_int2 + p.kappa_ext2;
  }
  if (cfg.nonreciprocal) p = apply_design(p);
  return p;
}

Values point_values(const SweepConfig& cfg, const std::vector<double>& axis_values) {
  Values v(cfg.params.begin(), cfg.params.end());
  for (std::size_t i = 0; i < cfg.axes.size(); ++i) v[cfg.axes[i].variable] = axis_values[i];
  return v;
}

}  // namespace

OmParams resolve_optomech(const SweepConfig& cfg, const std::vector<double>& axis_values) {
  if (cfg.model != ModelKind::kOptomech)
    throw Error(ErrorCode::kInvalidInput, "not an optomechanical config");
  OmParams p = resolve_om(cfg, point_values(cfg, axis_values));
  p.validate();
  return p;
}

CascadedParams resolve_point(const SweepConfig& cfg, const std::vector<double>& axis_values) {
  const Values v = point_values(cfg, axis_values);
  if (cfg.model == ModelKind::kCascaded) {
    CascadedParams p = resolve_cascaded(v);
    p.validate();
    return p;
  }
  return map_to_cascaded(resolve_om(cfg, v));
}

namespace {

// ---- config checks ---------------------------------------------------------

void check_conflicts(const SweepConfig& cfg) {
  std::set<std::string, std::less<>> keys;
  for (const auto& [k, value] : cfg.params) keys.insert(k);
  for (const SweepAxis& a : cfg.axes) keys.insert(a.variable);
  auto clash = [&](std::string_view a, std::initializer_list<std::string_view> others) {
    if (!keys.contains(a)) return;
    for (std::string_view o : others)
      if (keys.contains(o))
        throw SchemaError("$.params", std::string(a) + " cannot be combined with " +
                                          std::string(o));
  };
  if (cfg.model == ModelKind::kCascaded) {
    clash("kappa", {"kappa1", "kappa2", "gamma1", "gamma2"});
    clash("Delta", {"omega2"});
    clash("F", {"F_re", "F_im"});
    clash("F_phase", {"F_re", "F_im"});
    for (std::string_view m : {"m1", "m2", "m3"}) clash(m, {"Nbar1", "Nbar2", "Nbar3"});
    const int m_count = static_cast<int>(keys.contains("m1")) +
                        static_cast<int>(keys.contains("m2")) +
                        static_cast<int>(keys.contains("m3"));
    if (m_count != 0 && m_count != 3)
      throw SchemaError("$.params", "m1, m2 and m3 must be given together");
  } else if (cfg.nonreciprocal) {
    for (std::string_view k : {"J", "phi"})
      if (keys.contains(k))
        throw SchemaError("$.params", std::string(k) + " is fixed by nonreciprocal = true");
  }
}

// Every corner of the axis box must resolve to valid parameters. The m-to-N
// map and the validation bounds are affine in each swept variable, so the
// corners cover the whole grid.
void check_corners(const SweepConfig& cfg) {
  const std::size_t n = cfg.axes.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i)
      values[i] = (mask >> i) & 1U ? cfg.axes[i].max : cfg.axes[i].min;
    try {
      resolve_point(cfg, values);
    } catch (const SchemaError&) {
      throw;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNegativeOccupation) throw;
      throw SchemaError("$.params", e.what());
    }
  }
}

// ---- evaluation ------------------------------------------------------------

class PointEvaluator {
 public:
  explicit PointEvaluator(const CascadedParams& p) : p_(p), sys_(build_system(p)) {}

  double stability() const { return stability_margin(sys_.M); }

  double value(const OutputSpec& out) {
    switch (out.kind) {
      case OutputSpec::Kind::kTheta:
        return large_deviation({out.channel, out.s}, sys_);
      case OutputSpec::Kind::kFlowDerivative:
        return flow_derivative(out.channel, out.bath);
      case OutputSpec::Kind::kPlain:
        break;
    }
    const std::string& n = out.name;
    if (n == "stability_margin") return stability();
    if (n == "F_residual") return std::abs(p_.F);
    if (n == "n1") return numeric().n1;
    if (n == "n2") return numeric().n2;
    if (n == "m1") return baseline().first;
    if (n == "m2") return baseline().second;
    if (n == "dn1") return numeric().n1 - baseline().first;
    if (n == "dn2") return numeric().n2 - baseline().second;
    if (n == "n1_cf") return closed_form().n1;
    if (n == "n2_cf") return closed_form().n2;
    if (n == "dn1_cf") return closed_delta().dn1;
    if (n == "dn2_cf") return closed_delta().dn2;
    if (n == "eta1") return flows()[0];
    if (n == "eta2") return flows()[1];
    if (n == "eta3") return flows()[2];
    if (n == "eta1_cf") return simplified_flows(p_)[0];
    if (n == "eta2_cf") return simplified_flows(p_)[1];
    if (n == "eta3_cf") return simplified_flows(p_)[2];
    throw Error(ErrorCode::kInvalidInput, "unknown output " + n);
  }

 private:
  const CovarianceMatrix& cov() {
    if (!cov_) cov_ = steady_state(sys_);
    return *cov_;
  }
  const Occupations& numeric() {
    if (!numeric_) numeric_ = occupations(cov());
    return *numeric_;
  }
  const std::pair<double, double>& baseline() {
    if (!baseline_) baseline_ = disconnected_baseline(p_);
    return *baseline_;
  }
  const Occupations& closed_form() {
    if (!closed_) closed_ = closed_form_occupations(p_);
    return *closed_;
  }
  const OccupationReport& closed_delta() {
    if (!closed_delta_) closed_delta_ = delta_n(p_, OccupationMethod::kClosedForm);
    return *closed_delta_;
  }
  const std::array<double, 3>& flows() {
    if (!flows_) flows_ = flow_first_moments(sys_, cov());
    return *flows_;
  }

  // eta is affine in each Nbar, so a one-sided difference is exact up to
  // rounding.
  double flow_derivative(int channel, int bath) {
    CascadedParams shifted = p_;
    double* field = bath == 1 ? &shifted.Nbar1 : bath == 2 ? &shifted.Nbar2 : &shifted.Nbar3;
    const double h = 1e-3 * std::max(1.0, *field);
    *field += h;
    const std::size_t i = static_cast<std::size_t>(channel - 1);
    const double upper = flow_first_moments(build_system(shifted))[i];
    return (upper - flows()[i]) / h;
  }

  CascadedParams p_;
  LinearSystem sys_;
  std::optional<CovarianceMatrix> cov_;
  std::optional<Occupations> numeric_;
  std::optional<std::pair<double, double>> baseline_;
  std::optional<Occupations> closed_;
  std::optional<OccupationReport> closed_delta_;
  std::optional<std::array<double, 3>> flows_;
};

std::vector<double> grid_point(const std::vector<std::vector<double>>& axis_values,
                               std::size_t index) {
  std::vector<double> out(axis_values.size());
  for (std::size_t k = axis_values.size(); k-- > 0;) {
    const std::size_t n = axis_values[k].size();
    out[k] = axis_values[k][index % n];
    index /= n;
  }
  return out;
}

ResultRow evaluate_row(const SweepConfig& cfg, const std::vector<OutputSpec>& outputs,
                       std::vector<double> axis_values) {
  ResultRow row;
  row.axis_values = std::move(axis_values);
  const CascadedParams p = resolve_point(cfg, row.axis_values);
  PointEvaluator eval(p);
  if (!(eval.stability() < 0.0)) {
    row.status = RowStatus::kUnstable;
    return row;
  }
  try {
    row.outputs.reserve(outputs.size());
    for (const OutputSpec& out : outputs) row.outputs.push_back(eval.value(out));
  } catch (const Error& e) {
    row.outputs.clear();
    switch (e.code()) {
      case ErrorCode::kUnstable:
        row.status = RowStatus::kUnstable;
        break;
      case ErrorCode::kUnsupportedParams:
      case ErrorCode::kZeroRateChannel:
      case ErrorCode::kOutsideAdmissibleRegion:
      case ErrorCode::kNoConvergence:
      case ErrorCode::kSingularSystem:
      case ErrorCode::kUnstableEffectiveDrift:
        row.status = RowStatus::kUnsupported;
        break;
      default:
        throw;
    }
  }
  return row;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string_view to_string(RowStatus status) {
  switch (status) {
    case RowStatus::kOk:
      return "ok";
    case RowStatus::kUnstable:
      return "unstable";
    case RowStatus::kUnsupported:
      return "unsupported";
  }
  return "unknown";
}

std::vector<double> SweepAxis::values() const {
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = min;
    return out;
  }
  const double last = static_cast<double>(points - 1);
  for (int k = 0; k < points; ++k) {
    const double t = static_cast<double>(k) / last;
    out[static_cast<std::size_t>(k)] =
        spacing == Spacing::kLog ? min * std::pow(max / min, t) : min + (max - min) * t;
  }
  out.front() = min;
  out.back() = max;
  return out;
}

SweepConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("$", "expected an object");

  static const std::set<std::string, std::less<>> kTopLevel = {"model",   "params", "axes",
                                                              "outputs", "format", "parallel"};
  for (const auto& [key, value] : doc.items())
    if (!kTopLevel.contains(key)) throw SchemaError("$." + key, "unknown key");

  SweepConfig cfg;
  if (!doc.contains("model")) throw SchemaError("$.model", "missing");
  const std::string model = require_string(doc["model"], "$.model");
  if (model == "cascaded")
    cfg.model = ModelKind::kCascaded;
  else if (model == "optomech")
    cfg.model = ModelKind::kOptomech;
  else
    throw SchemaError("$.model", "expected \"cascaded\" or \"optomech\"");
  const auto& names = cfg.model == ModelKind::kCascaded ? kCascadedNames : kOmNames;

  if (doc.contains("params")) {
    const json& params = doc["params"];
    if (!params.is_object()) throw SchemaError("$.params", "expected an object");
    for (const auto& [key, value] : params.items()) {
      const std::string path = "$.params." + key;
      if (cfg.model == ModelKind::kOptomech && key == "preset") {
        if (require_string(value, path) != "microwave")
          throw SchemaError(path, "only \"microwave\" is available");
        cfg.preset_microwave = true;
      } else if (cfg.model == ModelKind::kOptomech && key == "nonreciprocal") {
        if (!value.is_boolean()) throw SchemaError(path, "expected a boolean");
        cfg.nonreciprocal = value.get<bool>();
      } else if (names.contains(key)) {
        cfg.params[key] = require_number(value, path);
      } else {
        throw SchemaError(path, "unknown parameter");
      }
    }
  }

  if (!doc.contains("axes")) throw SchemaError("$.axes", "missing");
  const json& axes = doc["axes"];
  if (!axes.is_array()) throw SchemaError("$.axes", "expected an array");
  if (axes.empty() || axes.size() > 3) throw SchemaError("$.axes", "expected 1 to 3 axes");
  std::set<std::string> seen_axes;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const std::string path = index_path("$.axes", i);
    const json& node = axes[i];
    if (!node.is_object()) throw SchemaError(path, "expected an object");
    for (const auto& [key, value] : node.items())
      if (key != "variable" && key != "min" && key != "max" && key != "points" &&
          key != "spacing")
        throw SchemaError(path + "." + key, "unknown key");
    for (const char* key : {"variable", "min", "max", "points"})
      if (!node.contains(key)) throw SchemaError(path + "." + key, "missing");

    SweepAxis axis;
    axis.variable = require_string(node["variable"], path + ".variable");
    if (!names.contains(axis.variable))
      throw SchemaError(path + ".variable", "unknown parameter " + axis.variable);
    if (!seen_axes.insert(axis.variable).second)
      throw SchemaError(path + ".variable", "duplicate axis " + axis.variable);
    axis.min = require_number(node["min"], path + ".min");
    axis.max = require_number(node["max"], path + ".max");
    const json& points = node["points"];
    if (!points.is_number_integer()) throw SchemaError(path + ".points", "expected an integer");
    const auto count = points.get<long long>();
    if (count < 1 || static_cast<std::size_t>(count) > kMaxGridPoints)
      throw SchemaError(path + ".points", "must be at least 1");
    axis.points = static_cast<int>(count);
    if (axis.points == 1 && axis.min != axis.max)
      throw SchemaError(path + ".points", "a single point needs min == max");
    if (node.contains("spacing")) {
      const std::string spacing = require_string(node["spacing"], path + ".spacing");
      if (spacing == "linear")
        axis.spacing = Spacing::kLinear;
      else if (spacing == "log")
        axis.spacing = Spacing::kLog;
      else
        throw SchemaError(path + ".spacing", "expected \"linear\" or \"log\"");
    }
    if (axis.spacing == Spacing::kLog && !(axis.min > 0.0 && axis.max > 0.0))
      throw SchemaError(path, "log spacing needs positive bounds");
    cfg.axes.push_back(std::move(axis));
  }
  if (grid_size(cfg) > kMaxGridPoints) throw SchemaError("$.axes", "grid too large");

  if (!doc.contains("outputs")) throw SchemaError("$.outputs", "missing");
  const json& outputs = doc["outputs"];
  if (!outputs.is_array() || outputs.empty())
    throw SchemaError("$.outputs", "expected a non-empty array");
  std::set<std::string> columns(seen_axes.begin(), seen_axes.end());
  columns.insert("status");
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const std::string path = index_path("$.outputs", i);
    const std::string name = require_string(outputs[i], path);
    if (!parse_output(name)) throw SchemaError(path, "unknown output " + name);
    if (!columns.insert(name).second) throw SchemaError(path, "duplicate column " + name);
    cfg.outputs.push_back(name);
  }

  if (doc.contains("format")) {
    const std::string format = require_string(doc["format"], "$.format");
    if (format == "csv")
      cfg.format = OutputFormat::kCsv;
    else if (format == "json")
      cfg.format = OutputFormat::kJson;
    else
      throw SchemaError("$.format", "expected \"csv\" or \"json\"");
  }
  if (doc.contains("parallel")) {
    if (!doc["parallel"].is_boolean()) throw SchemaError("$.parallel", "expected a boolean");
    cfg.parallel = doc["parallel"].get<bool>();
  }

  check_conflicts(cfg);
  check_corners(cfg);
  return cfg;
}

SweepConfig point_config(ModelKind model, const std::map<std::string, double>& params,
                         bool preset_microwave, bool nonreciprocal) {
  SweepConfig cfg;
  cfg.model = model;
  cfg.preset_microwave = preset_microwave;
  cfg.nonreciprocal = nonreciprocal;
  const auto& names = model == ModelKind::kCascaded ? kCascadedNames : kOmNames;
  if (model == ModelKind::kCascaded && (preset_microwave || nonreciprocal))
    throw SchemaError("model", "presets and the nonreciprocal design need the optomech model");
  for (const auto& [key, value] : params) {
    if (!names.contains(key)) throw SchemaError(key, "unknown parameter");
    if (!std::isfinite(value)) throw SchemaError(key, "expected a finite number");
  }
  cfg.params = params;
  check_conflicts(cfg);
  check_corners(cfg);
  return cfg;
}

std::size_t grid_size(const SweepConfig& cfg) {
  std::size_t n = 1;
  for (const SweepAxis& a : cfg.axes) {
    const auto points = static_cast<std::size_t>(a.points);
    if (n > kMaxGridPoints / points + 1) return kMaxGridPoints + 1;
    n *= points;
  }
  return n;
}

std::vector<ResultRow> run_sweep(const SweepConfig& cfg) {
  if (cfg.axes.empty()) throw SchemaError("$.axes", "expected 1 to 3 axes");
  std::vector<OutputSpec> outputs;
  for (std::size_t i = 0; i < cfg.outputs.size(); ++i) {
    auto spec = parse_output(cfg.outputs[i]);
    if (!spec) throw SchemaError(index_path("$.outputs", i), "unknown output " + cfg.outputs[i]);
    outputs.push_back(*spec);
  }
  std::vector<std::vector<double>> axis_values;
  for (const SweepAxis& a : cfg.axes) axis_values.push_back(a.values());

  const std::size_t total = grid_size(cfg);
  std::vector<ResultRow> rows(total);

  if (!cfg.parallel || total < 2) {
    for (std::size_t i = 0; i < total; ++i)
      rows[i] = evaluate_row(cfg, outputs, grid_point(axis_values, i));
    return rows;
  }

  const std::size_t workers =
      std::min<std::size_t>(total, std::max(2U, std::thread::hardware_concurrency()));
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < total; i += workers)
          rows[i] = evaluate_row(cfg, outputs, grid_point(axis_values, i));
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (std::thread& th : threads) th.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::vector<std::string> column_names(const SweepConfig& cfg) {
  std::vector<std::string> cols;
  for (const SweepAxis& a : cfg.axes) cols.push_back(a.variable);
  cols.insert(cols.end(), cfg.outputs.begin(), cfg.outputs.end());
  cols.emplace_back("status");
  return cols;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  return std::string(buf.data(), ptr);
}

std::string emit(const SweepConfig& cfg, const std::vector<ResultRow>& rows,
                 OutputFormat format) {
  const std::vector<std::string> cols = column_names(cfg);
  const std::size_t n_axes = cfg.axes.size();
  const std::size_t n_outputs = cfg.outputs.size();

  if (format == OutputFormat::kJson) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const ResultRow& row : rows) {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < n_axes; ++i) obj[cols[i]] = row.axis_values[i];
      for (std::size_t i = 0; i < n_outputs; ++i) {
        if (row.status == RowStatus::kOk)
          obj[cols[n_axes + i]] = row.outputs[i];
        else
          obj[cols[n_axes + i]] = nullptr;
      }
      obj["status"] = std::string(to_string(row.status));
      doc.push_back(std::move(obj));
    }
    return doc.dump(2) + "\n";
  }

  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += csv_field(cols[i]);
  }
  out += '\n';
  for (const ResultRow& row : rows) {
    for (double v : row.axis_values) {
      out += format_double(v);
      out += ',';
    }
    for (std::size_t i = 0; i < n_outputs; ++i) {
      if (row.status == RowStatus::kOk) out += format_double(row.outputs[i]);
      out += ',';
    }
    out += to_string(row.status);
    out += '\n';
  }
  return out;
}

}  // namespace noiseflow
