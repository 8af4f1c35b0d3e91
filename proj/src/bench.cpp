#include "onebit/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "onebit/error.hpp"
#include "onebit/report_io.hpp"
#include "onebit/theory.hpp"

namespace onebit {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) throw UsageError(where + ": expected a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw UsageError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config key '") + key + "': " + e.what());
  }
}

std::vector<double> staircase_levels(double lo, double step, int count) {
  std::vector<double> v;
  for (int k = 0; k < count; ++k) v.push_back(std::round((lo + k * step) * 1e9) / 1e9);
  return v;
}

ScheduleSpec constant_spec(double v) {
  ScheduleSpec s;
  s.kind = ScheduleKind::kConstant;
  s.value = v;
  return s;
}

ScheduleSpec staircase_spec() {
  ScheduleSpec s;
  s.kind = ScheduleKind::kStaircase;
  s.levels = staircase_levels(0.1, 0.1, 10);
  return s;
}

ScheduleSpec dither_spec(double mean, double variance) {
  ScheduleSpec s;
  s.kind = ScheduleKind::kGaussianDither;
  s.value = mean;
  s.dither_variance = variance;
  return s;
}

std::string label_number(double v) { return format_double(v); }

ScheduleSpec schedule_from_json(const json& j) {
  check_keys(j, {"kind", "value", "levels", "dither_variance", "amplitude", "period"},
             "schedule");
  ScheduleSpec s;
  s.kind = schedule_kind_from_string(get_or<std::string>(j, "kind", "zero"));
  s.value = get_or<double>(j, "value", 0.0);
  s.levels = get_or<std::vector<double>>(j, "levels", {});
  s.dither_variance = get_or<double>(j, "dither_variance", 0.0);
  s.amplitude = get_or<double>(j, "amplitude", 0.0);
  s.period = get_or<double>(j, "period", 1.0);
  return s;
}

json schedule_to_json(const ScheduleSpec& s) {
  json j = {{"kind", to_string(s.kind)}};
  switch (s.kind) {
    case ScheduleKind::kZero:
    case ScheduleKind::kExplicit: break;
    case ScheduleKind::kConstant: j["value"] = s.value; break;
    case ScheduleKind::kStaircase: j["levels"] = s.levels; break;
    case ScheduleKind::kGaussianDither:
      j["value"] = s.value;
      j["dither_variance"] = s.dither_variance;
      break;
    case ScheduleKind::kSine:
      j["value"] = s.value;
      j["amplitude"] = s.amplitude;
      j["period"] = s.period;
      break;
  }
  return j;
}

// Per-trial outcome of one method.
struct TrialOutcome {
  bool ok = false;
  std::array<double, 3> sq_err{};
  std::array<double, 3> abs_grad{};
  int joint_iterations = 0;
  bool line_search_failed = false;
};

struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  int count = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++count;
  }
  double mean() const { return count ? sum / count : std::numeric_limits<double>::quiet_NaN(); }
  double se() const {
    if (count < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = mean();
    const double var = std::max(0.0, (sum_sq - count * m * m) / (count - 1));
    return std::sqrt(var / count);
  }
};

std::vector<std::vector<TrialOutcome>> run_trials(const ExperimentConfig& config,
                                                  double sweep_value) {
  const PairParams truth = config.params_at(sweep_value);
  const std::int64_t n = config.samples_at(sweep_value);
  std::vector<ThresholdSchedule> schedules;
  for (const auto& m : config.methods) {
    schedules.push_back(config.schedule_at(m, sweep_value).build(2, n));
  }
  const auto trials = static_cast<std::size_t>(config.trials);
  std::vector<std::vector<TrialOutcome>> out(trials,
                                             std::vector<TrialOutcome>(config.methods.size()));

  auto one_trial = [&](std::size_t trial) {
    const std::uint64_t seed = config.base_seed + trial;
    const Eigen::MatrixXd y = sample_gaussian(truth, n, seed);
    for (std::size_t k = 0; k < config.methods.size(); ++k) {
      TrialOutcome& r = out[trial][k];
      try {
        const OneBitBatch batch = quantize_real(y, schedules[k], seed);
        RecoveryOptions opts = config.recovery;
        opts.method = config.methods[k].method;
        const PairEstimate e = estimate_pair(batch, 0, 1, opts);
        const Eigen::Vector3d err = e.params.theta() - truth.theta();
        if (!err.allFinite()) continue;
        for (int p = 0; p < 3; ++p) r.sq_err[p] = err[p] * err[p];
        if (opts.method == Method::kTimeVaryingJoint) {
          for (int p = 0; p < 3; ++p) {
            r.abs_grad[p] = std::abs(e.initial_gradient[p]) / static_cast<double>(n);
          }
          r.joint_iterations = e.joint_iterations;
          r.line_search_failed = e.line_search_failed;
        }
        r.ok = true;
      } catch (const Error&) {
        r.ok = false;
      }
    }
  };

  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max(1, config.trials));
  if (threads == 1) {
    for (std::size_t t = 0; t < trials; ++t) one_trial(t);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < trials; t = next++) {
        try {
          one_trial(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

void fill_theory(BenchResult& result) {
  const ExperimentConfig& c = result.config;
  for (auto& row : result.rows) {
    const auto it = std::find_if(c.methods.begin(), c.methods.end(),
                                 [&](const MethodSpec& m) { return m.label == row.method; });
    if (it == c.methods.end()) continue;
    try {
      const PairParams p = c.params_at(row.sweep_value);
      const ThresholdSchedule s = c.schedule_at(*it, row.sweep_value).build(2, row.samples);
      const TheoryReport rep = predict_mse(p, s, it->method);
      const double values[3] = {rep.mse_sigma1, rep.mse_sigma2, rep.mse_sigma12};
      for (int k = 0; k < 3; ++k) {
        if (row.parameter == kParamNames[static_cast<std::size_t>(k)]) {
          row.theory_mse = values[k];
          row.ratio = row.mse / values[k];
        }
      }
    } catch (const Error&) {
    }
  }
}

}  // namespace

ThresholdSchedule ScheduleSpec::build(int channels, std::int64_t samples) const {
  switch (kind) {
    case ScheduleKind::kZero: return ThresholdSchedule::zero(channels, samples);
    case ScheduleKind::kConstant: return ThresholdSchedule::constant(channels, samples, value);
    case ScheduleKind::kStaircase:
      return ThresholdSchedule::staircase(channels, samples, levels);
    case ScheduleKind::kGaussianDither:
      if (!(dither_variance > 0.0)) throw UsageError("dither schedule: variance must be > 0");
      return ThresholdSchedule::gaussian_dither(channels, samples, value,
                                                {std::sqrt(dither_variance)});
    case ScheduleKind::kSine:
      return ThresholdSchedule::sine(channels, samples, amplitude, period, value);
    case ScheduleKind::kExplicit: break;
  }
  throw UsageError("schedule spec: explicit schedules are not supported in configs");
}

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::kNone: return "none";
    case SweepVariable::kThreshold: return "threshold";
    case SweepVariable::kRho: return "rho";
    case SweepVariable::kDelta: return "delta";
    case SweepVariable::kSamples: return "samples";
  }
  return "none";
}

SweepVariable sweep_variable_from_string(const std::string& name) {
  if (name == "none") return SweepVariable::kNone;
  if (name == "threshold") return SweepVariable::kThreshold;
  if (name == "rho") return SweepVariable::kRho;
  if (name == "delta") return SweepVariable::kDelta;
  if (name == "samples") return SweepVariable::kSamples;
  throw UsageError("unknown sweep variable '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw UsageError("config: trials must be >= 1");
  if (samples < 1) throw UsageError("config: samples must be >= 1");
  if (threads < 0) throw UsageError("config: threads must be >= 0");
  if (methods.empty()) throw UsageError("config: no methods");
  std::set<std::string> labels;
  for (const auto& m : methods) {
    if (m.method == Method::kArcsine) {
      throw UsageError("config: the arcsine method does not estimate sigma_i");
    }
    if (!labels.insert(m.label).second) {
      throw UsageError("config: duplicate method label '" + m.label + "'");
    }
  }
  if (sweep != SweepVariable::kNone && sweep_values.empty()) {
    throw UsageError("config: sweep '" + to_string(sweep) + "' without values");
  }
  const std::vector<double> points =
      sweep == SweepVariable::kNone ? std::vector<double>{0.0} : sweep_values;
  for (double s : points) {
    params_at(s).validate();
    const std::int64_t n = samples_at(s);
    if (n < 1) throw UsageError("config: sweep produced a non-positive sample count");
    for (const auto& m : methods) schedule_at(m, s).build(2, n);
  }
}

PairParams ExperimentConfig::params_at(double s) const {
  switch (sweep) {
    case SweepVariable::kRho: return PairParams::from_rho(params.sigma1, params.sigma2, s);
    case SweepVariable::kDelta:
      return PairParams::from_rho(params.sigma1 + s, params.sigma2 - s, params.rho());
    default: return params;
  }
}

std::int64_t ExperimentConfig::samples_at(double s) const {
  return sweep == SweepVariable::kSamples ? static_cast<std::int64_t>(std::llround(s))
                                          : samples;
}

ScheduleSpec ExperimentConfig::schedule_at(const MethodSpec& m, double s) const {
  ScheduleSpec spec = m.schedule;
  if (sweep == SweepVariable::kThreshold && spec.kind == ScheduleKind::kConstant) {
    spec.value = s;
  }
  return spec;
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j,
             {"name", "params", "samples", "trials", "seed", "threads", "theory", "output",
              "sweep", "methods", "recovery"},
             "config");
  ExperimentConfig c;
  c.name = get_or<std::string>(j, "name", c.name);
  if (j.contains("params")) {
    const json& p = j.at("params");
    check_keys(p, {"sigma1", "sigma2", "sigma12", "rho"}, "params");
    if (p.contains("sigma12") && p.contains("rho")) {
      throw UsageError("params: give sigma12 or rho, not both");
    }
    c.params.sigma1 = get_or<double>(p, "sigma1", c.params.sigma1);
    c.params.sigma2 = get_or<double>(p, "sigma2", c.params.sigma2);
    if (p.contains("rho")) {
      c.params.sigma12 = get_or<double>(p, "rho", 0.0) * c.params.sigma1 * c.params.sigma2;
    } else {
      c.params.sigma12 = get_or<double>(p, "sigma12", c.params.sigma12);
    }
  }
  c.samples = get_or<std::int64_t>(j, "samples", c.samples);
  c.trials = get_or<int>(j, "trials", c.trials);
  c.base_seed = get_or<std::uint64_t>(j, "seed", c.base_seed);
  c.threads = get_or<int>(j, "threads", c.threads);
  c.theory = get_or<bool>(j, "theory", c.theory);
  c.output = get_or<std::string>(j, "output", c.output);
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s, {"variable", "values"}, "sweep");
    c.sweep = sweep_variable_from_string(get_or<std::string>(s, "variable", "none"));
    c.sweep_values = get_or<std::vector<double>>(s, "values", {});
  }
  if (j.contains("methods")) {
    for (const auto& m : j.at("methods")) {
      check_keys(m, {"label", "method", "schedule"}, "method");
      MethodSpec spec;
      spec.method = method_from_string(get_or<std::string>(m, "method", "time_varying"));
      spec.label = get_or<std::string>(m, "label", to_string(spec.method));
      if (m.contains("schedule")) spec.schedule = schedule_from_json(m.at("schedule"));
      c.methods.push_back(spec);
    }
  }
  if (j.contains("recovery")) {
    const json& r = j.at("recovery");
    check_keys(r, {"series_order", "learning_rate", "joint_max_iter", "newton_max_iter"},
               "recovery");
    c.recovery.series_order = get_or<int>(r, "series_order", c.recovery.series_order);
    const auto lr = get_or<std::string>(r, "learning_rate", "backtracking");
    if (lr == "backtracking") {
      c.recovery.joint.learning_rate = LearningRate::kBacktracking;
    } else if (lr == "barzilai_borwein") {
      c.recovery.joint.learning_rate = LearningRate::kBarzilaiBorwein;
    } else {
      throw UsageError("recovery: unknown learning_rate '" + lr + "'");
    }
    c.recovery.joint.max_iter = get_or<int>(r, "joint_max_iter", c.recovery.joint.max_iter);
    c.recovery.newton.max_iter = get_or<int>(r, "newton_max_iter", c.recovery.newton.max_iter);
  }
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json methods = json::array();
  for (const auto& m : c.methods) {
    methods.push_back({{"label", m.label},
                       {"method", to_string(m.method)},
                       {"schedule", schedule_to_json(m.schedule)}});
  }
  return {{"name", c.name},
          {"params", to_json(c.params)},
          {"samples", c.samples},
          {"trials", c.trials},
          {"seed", c.base_seed},
          {"threads", c.threads},
          {"theory", c.theory},
          {"output", c.output},
          {"sweep", {{"variable", to_string(c.sweep)}, {"values", c.sweep_values}}},
          {"methods", methods},
          {"recovery",
           {{"series_order", c.recovery.series_order},
            {"learning_rate", c.recovery.joint.learning_rate == LearningRate::kBacktracking
                                  ? "backtracking"
                                  : "barzilai_borwein"},
            {"joint_max_iter", c.recovery.joint.max_iter},
            {"newton_max_iter", c.recovery.newton.max_iter}}}};
}

std::vector<std::string> builtin_names() {
  return {"fig1", "fig2", "fig3", "fig4", "fig5", "table1"};
}

ExperimentConfig builtin_config(const std::string& name) {
  constexpr double kDitherVariance = 0.15;
  ExperimentConfig c;
  c.name = name;
  c.samples = 1000;
  c.trials = 10000;
  c.base_seed = 1;
  const MethodSpec tv{"time_varying", Method::kTimeVarying, staircase_spec()};
  const MethodSpec dither{"dither", Method::kDither, dither_spec(0.5, kDitherVariance)};
  const MethodSpec const05{"constant", Method::kConstant, constant_spec(0.5)};
  if (name == "fig1") {
    c.params = {0.25, 0.6, -0.08};
    c.theory = true;
    c.sweep = SweepVariable::kThreshold;
    c.sweep_values = staircase_levels(0.1, 0.05, 31);
    c.methods = {const05};
  } else if (name == "fig2") {
    c.params = {0.25, 0.6, -0.08};
    c.methods.push_back(tv);
    for (double v : staircase_levels(0.1, 0.1, 10)) {
      c.methods.push_back({"constant_v" + label_number(v), Method::kConstant, constant_spec(v)});
    }
    c.methods.push_back(dither);
  } else if (name == "fig3") {
    c.params = {0.25, 0.6, 0.0};
    c.sweep = SweepVariable::kRho;
    c.sweep_values = staircase_levels(-0.95, 0.1, 20);
    c.methods = {tv, const05, dither};
  } else if (name == "fig4") {
    c.params = PairParams::from_rho(0.6, 0.6, 0.5);
    c.sweep = SweepVariable::kDelta;
    c.sweep_values = {0.0, 0.1, 0.2, 0.3, 0.4};
    c.methods = {tv, const05, dither};
  } else if (name == "fig5") {
    c.params = {0.8, 0.9, 0.25};
    c.theory = true;
    c.sweep = SweepVariable::kSamples;
    c.sweep_values = {100, 300, 1000, 3000, 10000};
    c.methods = {tv, const05, dither};
  } else if (name == "table1") {
    c.params = PairParams::from_rho(0.25, 0.6, 0.5);
    c.theory = true;
    c.methods = {tv, {"time_varying_joint", Method::kTimeVaryingJoint, staircase_spec()}};
  } else {
    throw UsageError("unknown builtin config '" + name + "'");
  }
  c.validate();
  return c;
}

const ResultRow& BenchResult::row(const std::string& method, const std::string& parameter,
                                  double sweep_value) const {
  for (const auto& r : rows) {
    if (r.method == method && r.parameter == parameter &&
        std::abs(r.sweep_value - sweep_value) < 1e-12) {
      return r;
    }
  }
  throw UsageError("bench result: no row for " + method + "/" + parameter);
}

BenchResult run(const ExperimentConfig& config) {
  config.validate();
  BenchResult result;
  result.config = config;
  const std::vector<double> points = config.sweep == SweepVariable::kNone
                                         ? std::vector<double>{0.0}
                                         : config.sweep_values;
  for (double s : points) {
    const auto outcomes = run_trials(config, s);
    for (std::size_t k = 0; k < config.methods.size(); ++k) {
      std::array<Accumulator, 3> acc;
      Accumulator grads[3];
      double max_grad[3] = {0.0, 0.0, 0.0};
      int failed = 0;
      int ls_failures = 0;
      double iterations = 0.0;
      // Trial order is fixed, so sums do not depend on thread scheduling.
      for (const auto& trial : outcomes) {
        const TrialOutcome& o = trial[k];
        if (!o.ok) {
          ++failed;
          continue;
        }
        for (int p = 0; p < 3; ++p) {
          acc[static_cast<std::size_t>(p)].add(o.sq_err[static_cast<std::size_t>(p)]);
          grads[p].add(o.abs_grad[static_cast<std::size_t>(p)]);
          max_grad[p] = std::max(max_grad[p], o.abs_grad[static_cast<std::size_t>(p)]);
        }
        ls_failures += o.line_search_failed ? 1 : 0;
        iterations += o.joint_iterations;
      }
      for (std::size_t p = 0; p < 3; ++p) {
        ResultRow row;
        row.experiment = config.name;
        row.method = config.methods[k].label;
        row.sweep = to_string(config.sweep);
        row.sweep_value = s;
        row.parameter = kParamNames[p];
        row.samples = config.samples_at(s);
        row.trials = acc[p].count;
        row.failed = failed;
        row.mse = acc[p].mean();
        row.se = acc[p].se();
        row.base_seed = config.base_seed;
        result.rows.push_back(row);
      }
      if (config.methods[k].method == Method::kTimeVaryingJoint) {
        JointStats js;
        js.method = config.methods[k].label;
        js.sweep_value = s;
        for (std::size_t p = 0; p < 3; ++p) {
          js.max_abs_gradient[p] = max_grad[p];
          js.mean_abs_gradient[p] = grads[p].mean();
        }
        js.line_search_failures = ls_failures;
        const int ok = acc[0].count;
        js.mean_iterations = ok ? iterations / ok : 0.0;
        result.joint.push_back(js);
      }
    }
  }
  if (config.theory) fill_theory(result);
  if (!config.output.empty()) write_file_atomic(config.output, csv_string(result));
  return result;
}

BenchResult compare_theory(ExperimentConfig config) {
  config.theory = true;
  return run(config);
}

BenchResult table1(ExperimentConfig config) {
  bool has_separate = false;
  bool has_joint = false;
  for (const auto& m : config.methods) {
    has_separate |= m.method == Method::kTimeVarying;
    has_joint |= m.method == Method::kTimeVaryingJoint;
  }
  if (!has_separate || !has_joint) {
    throw UsageError("table1: needs a time_varying and a time_varying_joint method");
  }
  config.theory = true;
  return run(config);
}

void write_csv(std::ostream& out, const BenchResult& result) {
  out << "# config: " << to_json(result.config).dump() << '\n';
  for (const auto& m : result.config.methods) {
    if (m.schedule.kind == ScheduleKind::kGaussianDither) {
      out << "# dither_covariance_interpretation: variance\n";
      break;
    }
  }
  for (const auto& js : result.joint) {
    out << "# joint " << js.method << " sweep_value=" << format_double(js.sweep_value)
        << " max_abs_initial_gradient_per_sample=" << format_double(js.max_abs_gradient[0])
        << ',' << format_double(js.max_abs_gradient[1]) << ','
        << format_double(js.max_abs_gradient[2])
        << " mean_abs_initial_gradient_per_sample=" << format_double(js.mean_abs_gradient[0])
        << ',' << format_double(js.mean_abs_gradient[1]) << ','
        << format_double(js.mean_abs_gradient[2])
        << " line_search_failures=" << js.line_search_failures
        << " mean_iterations=" << format_double(js.mean_iterations) << '\n';
  }
  out << "experiment,method,sweep,sweep_value,parameter,N,trials,failed,mse,se,theory_mse,"
         "ratio,base_seed\n";
  for (const auto& r : result.rows) {
    out << r.experiment << ',' << r.method << ',' << r.sweep << ','
        << format_double(r.sweep_value) << ',' << r.parameter << ',' << r.samples << ','
        << r.trials << ',' << r.failed << ',' << format_double(r.mse) << ','
        << format_double(r.se) << ',' << format_double(r.theory_mse) << ','
        << format_double(r.ratio) << ',' << r.base_seed << '\n';
  }
}

std::string csv_string(const BenchResult& result) {
  std::ostringstream os;
  write_csv(os, result);
  return os.str();
}

namespace {

// a <= b within three combined standard errors.
bool leq_3se(const ResultRow& a, const ResultRow& b) {
  return a.mse - b.mse <= 3.0 * std::hypot(a.se, b.se);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

Check within(const std::string& name, double value, double target, double rel) {
  Check c;
  c.name = name;
  c.passed = std::abs(value / target - 1.0) <= rel;
  c.detail = fmt(value) + " vs " + fmt(target) + " (tol " + fmt(100 * rel) + "%)";
  return c;
}

}  // namespace

std::vector<Check> evaluate_checks(const BenchResult& result) {
  const ExperimentConfig& c = result.config;
  std::vector<Check> checks;
  if (c.name == "table1") {
    const double reference[3] = {2.291e-4, 1.024e-3, 2.160e-4};
    for (std::size_t p = 0; p < 3; ++p) {
      const ResultRow& sep = result.row("time_varying", kParamNames[p]);
      const ResultRow& joint = result.row("time_varying_joint", kParamNames[p]);
      checks.push_back(within(std::string("table1 separate MSE ") + kParamNames[p], sep.mse,
                              reference[p], 0.15));
      checks.push_back(within(std::string("table1 joint vs separate ") + kParamNames[p],
                              joint.mse, sep.mse, 0.03));
      checks.push_back(within(std::string("fim diag(F^-1) vs empirical ") + kParamNames[p],
                              sep.theory_mse, sep.mse, 0.10));
    }
  } else if (c.name == "fig2") {
    for (const char* p : kParamNames) {
      const ResultRow& tv = result.row("time_varying", p);
      for (const auto& m : c.methods) {
        if (m.label == "time_varying") continue;
        const ResultRow& other = result.row(m.label, p);
        Check ch;
        ch.name = std::string("fig2 time_varying <= ") + m.label + " " + p;
        ch.passed = leq_3se(tv, other);
        ch.detail = fmt(tv.mse) + " vs " + fmt(other.mse);
        checks.push_back(ch);
      }
    }
  } else if (c.name == "fig4") {
    const double lo = c.sweep_values.front();
    const double hi = c.sweep_values.back();
    for (const char* p : kParamNames) {
      const ResultRow& tv0 = result.row("time_varying", p, lo);
      const ResultRow& tv1 = result.row("time_varying", p, hi);
      const double tv_deg = tv1.mse - tv0.mse;
      const double tv_se = std::hypot(tv0.se, tv1.se);
      for (const auto& m : c.methods) {
        if (m.label == "time_varying") continue;
        const ResultRow& o0 = result.row(m.label, p, lo);
        const ResultRow& o1 = result.row(m.label, p, hi);
        const double deg = o1.mse - o0.mse;
        Check ch;
        ch.name = std::string("fig4 degradation time_varying <= ") + m.label + " " + p;
        ch.passed = tv_deg - deg <= 3.0 * std::hypot(tv_se, std::hypot(o0.se, o1.se));
        ch.detail = fmt(tv_deg) + " vs " + fmt(deg);
        checks.push_back(ch);
      }
    }
  } else if (c.name == "fig5") {
    for (const auto& r : result.rows) {
      if (r.samples < 1000) continue;
      Check ch;
      ch.name = "fig5 empirical/theory " + r.method + " " + r.parameter + " N=" +
                std::to_string(r.samples);
      ch.passed = r.ratio >= 0.9 && r.ratio <= 1.1;
      ch.detail = "ratio " + fmt(r.ratio);
      checks.push_back(ch);
    }
  }
  return checks;
}

}  // namespace onebit
