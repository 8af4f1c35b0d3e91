#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "onebit/quantizer.hpp"
#include "onebit/recovery.hpp"
#include "onebit/schedule.hpp"

namespace onebit {

// Declarative threshold schedule for a two-channel experiment.
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::kZero;
  double value = 0.0;           // constant value, dither mean, sine offset
  std::vector<double> levels;   // staircase levels, one per equal sub-interval
  double dither_variance = 0.0; // per-channel variance of the dither
  double amplitude = 0.0;
  double period = 1.0;

  ThresholdSchedule build(int channels, std::int64_t samples) const;
};

struct MethodSpec {
  std::string label;
  Method method = Method::kTimeVarying;
  ScheduleSpec schedule;
};

enum class SweepVariable { kNone, kThreshold, kRho, kDelta, kSamples };
std::string to_string(SweepVariable variable);
SweepVariable sweep_variable_from_string(const std::string& name);

struct ExperimentConfig {
  std::string name = "custom";
  PairParams params{0.25, 0.6, -0.08};
  std::int64_t samples = 1000;
  int trials = 10000;
  std::uint64_t base_seed = 1;
  int threads = 0;  // 0: hardware concurrency
  bool theory = false;
  std::string output;  // CSV path; empty for none
  SweepVariable sweep = SweepVariable::kNone;
  std::vector<double> sweep_values;
  std::vector<MethodSpec> methods;
  RecoveryOptions recovery;

  // Throws UsageError for invalid configurations.
  void validate() const;
  // Parameters and sample count at one sweep value.
  PairParams params_at(double sweep_value) const;
  std::int64_t samples_at(double sweep_value) const;
  ScheduleSpec schedule_at(const MethodSpec& method, double sweep_value) const;
};

// JSON round trip. Unknown keys are rejected with UsageError.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

// Builtin configurations: fig1, fig2, fig3, fig4, fig5, table1.
std::vector<std::string> builtin_names();
ExperimentConfig builtin_config(const std::string& name);

inline constexpr std::array<const char*, 3> kParamNames = {"sigma1", "sigma2", "sigma12"};

struct ResultRow {
  std::string experiment;
  std::string method;
  std::string sweep;
  double sweep_value = 0.0;
  std::string parameter;
  std::int64_t samples = 0;
  int trials = 0;   // successful trials entering the MSE
  int failed = 0;
  double mse = 0.0;
  double se = 0.0;  // standard error of mse
  double theory_mse = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();  // mse / theory_mse
  std::uint64_t base_seed = 0;
};

// Joint-stage statistics of a time_varying_joint method, per sweep value.
struct JointStats {
  std::string method;
  double sweep_value = 0.0;
  std::array<double, 3> max_abs_gradient{};   // max over trials of |dL/dtheta| / N at start
  std::array<double, 3> mean_abs_gradient{};  // mean over trials of |dL/dtheta| / N at start
  int line_search_failures = 0;
  double mean_iterations = 0.0;
};

struct BenchResult {
  ExperimentConfig config;
  std::vector<ResultRow> rows;
  std::vector<JointStats> joint;

  const ResultRow& row(const std::string& method, const std::string& parameter,
                       double sweep_value = 0.0) const;
};

// Runs every (sweep value, trial, method); per-trial seed = base_seed + trial.
// Writes the CSV atomically when config.output is set.
BenchResult run(const ExperimentConfig& config);

// As run, with theory columns filled from predict_mse.
BenchResult compare_theory(ExperimentConfig config);

// Table 1 setup: separate and joint MLE on the staircase schedule.
BenchResult table1(ExperimentConfig config);

// CSV: '#'-prefixed header carrying the resolved config, then
// experiment,method,sweep,sweep_value,parameter,N,trials,failed,mse,se,
// theory_mse,ratio,base_seed
void write_csv(std::ostream& out, const BenchResult& result);
std::string csv_string(const BenchResult& result);

// Named pass/fail claims evaluated on a bench result.
struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Claims attached to builtin experiments (empty for custom configs).
std::vector<Check> evaluate_checks(const BenchResult& result);

}  // namespace onebit
