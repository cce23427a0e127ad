#pragma once

// Grid sweeps over cascaded or optomechanical parameters.
//
// Config document (JSON):
//   {
//     "model":   "cascaded" | "optomech",
//     "params":  { name: number, ... },
//     "axes":    [ {"variable": name, "min": x, "max": y, "points": n,
//                   "spacing": "linear" | "log"}, ... ],      // 1 to 3 axes
//     "outputs": [ name, ... ],
//     "format":  "csv" | "json",                              // optional
//     "parallel": bool                                        // optional
//   }
//
// Cascaded parameter names: the CascadedParams fields (F split into F_re and
// F_im) plus the shorthands
//   kappa        sets kappa1 = kappa2 = gamma1 = gamma2
//   Delta        omega2 = omega1 + Delta
//   F, F_phase   F = F * exp(i F_phase)
//   m1, m2, m3   baselines; Nbar_i = 2 m_i - m3, Nbar3 = m3
// Optomech parameter names: the OmParams fields, plus
//   "preset": "microwave" and "nonreciprocal": true (apply the J, phi design).
//
// Output names:
//   n1 n2 m1 m2 dn1 dn2 eta1 eta2 eta3    numeric (Lyapunov / trace formula)
//   n1_cf n2_cf dn1_cf dn2_cf             equal-rate closed forms
//   eta1_cf eta2_cf eta3_cf               equal-rate F = 0 flow closed forms
//   stability_margin F_residual
//   theta<j>@<s>                          e.g. theta3@0.25
//   deta<i>_dNbar<j>                      forward difference of eta_i in Nbar_j

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noiseflow/cascaded.hpp"
#include "noiseflow/error.hpp"
#include "noiseflow/optomech.hpp"

namespace noiseflow {

class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& message)
      : Error(ErrorCode::kSchemaError, path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

enum class ModelKind { kCascaded, kOptomech };
enum class Spacing { kLinear, kLog };
enum class OutputFormat { kCsv, kJson };
enum class RowStatus { kOk, kUnstable, kUnsupported };

std::string_view to_string(RowStatus status);

struct SweepAxis {
  std::string variable;
  double min = 0.0;
  double max = 0.0;
  int points = 2;
  Spacing spacing = Spacing::kLinear;

  std::vector<double> values() const;
};

struct SweepConfig {
  ModelKind model = ModelKind::kCascaded;
  std::map<std::string, double> params;
  /// Optomech only.
  bool preset_microwave = false;
  bool nonreciprocal = false;
  std::vector<SweepAxis> axes;
  std::vector<std::string> outputs;
  OutputFormat format = OutputFormat::kCsv;
  bool parallel = false;
};

struct ResultRow {
  std::vector<double> axis_values;
  /// Empty unless status == kOk.
  std::vector<double> outputs;
  RowStatus status = RowStatus::kOk;
};

SweepConfig parse_config(std::string_view text);

/// Axis-free config for a single parameter point; names and combinations are
/// checked as in parse_config.
SweepConfig point_config(ModelKind model, const std::map<std::string, double>& params,
                         bool preset_microwave = false, bool nonreciprocal = false);

/// Cascaded parameters at one grid point (optomech configs are mapped).
CascadedParams resolve_point(const SweepConfig& cfg, const std::vector<double>& axis_values);

/// Optomech parameters at one grid point, after the optional design step.
OmParams resolve_optomech(const SweepConfig& cfg, const std::vector<double>& axis_values);

/// Number of grid points (product of axis sizes).
std::size_t grid_size(const SweepConfig& cfg);

/// Row-major: the last axis varies fastest.
std::vector<ResultRow> run_sweep(const SweepConfig& cfg);

/// Column names: axis variables, then outputs, then "status".
std::vector<std::string> column_names(const SweepConfig& cfg);

std::string emit(const SweepConfig& cfg, const std::vector<ResultRow>& rows,
                 OutputFormat format);

/// printf("%.17g") equivalent; reads back bit-exactly.
std::string format_double(double value);

}  // namespace noiseflow
