#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "onebit/batch_io.hpp"
#include "onebit/bench.hpp"
#include "onebit/doa.hpp"
#include "onebit/error.hpp"
#include "onebit/quantizer.hpp"
#include "onebit/recovery.hpp"
#include "onebit/report_io.hpp"
#include "onebit/selftest.hpp"
#include "onebit/theory.hpp"

namespace {

using nlohmann::json;
using onebit::UsageError;

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitAcceptance = 3;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("'" + path + "': " + e.what());
  }
}

// key=value with dotted keys; the value is parsed as JSON when possible.
void apply_overrides(json& j, const std::vector<std::string>& overrides) {
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError("override '" + kv + "' is not key=value");
    }
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;
    }
    json* node = &j;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) node = &(*node)[parts[k]];
    (*node)[parts.back()] = value;
  }
}

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw UsageError(where + ": unknown key '" + key + "'");
  }
}

onebit::PairParams params_from_json(const json& p) {
  require_keys(p, {"sigma1", "sigma2", "sigma12", "rho"}, "params");
  onebit::PairParams out{p.value("sigma1", 1.0), p.value("sigma2", 1.0), 0.0};
  if (p.contains("rho")) {
    out.sigma12 = p.at("rho").get<double>() * out.sigma1 * out.sigma2;
  } else {
    out.sigma12 = p.value("sigma12", 0.0);
  }
  out.validate();
  return out;
}

onebit::ScheduleSpec schedule_spec_from_json(const json& s) {
  require_keys(s, {"kind", "value", "levels", "dither_variance", "amplitude", "period"},
               "schedule");
  onebit::ScheduleSpec spec;
  spec.kind = onebit::schedule_kind_from_string(s.value("kind", std::string("zero")));
  spec.value = s.value("value", 0.0);
  spec.levels = s.value("levels", std::vector<double>{});
  spec.dither_variance = s.value("dither_variance", 0.0);
  spec.amplitude = s.value("amplitude", 0.0);
  spec.period = s.value("period", 1.0);
  return spec;
}

void emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
  } else {
    onebit::write_file_atomic(path, contents);
  }
}

// ---- recover --------------------------------------------------------------

struct RecoverArgs {
  std::string config, batch, method = "time_varying", out;
  std::uint64_t seed = 1;
  bool seed_set = false;
  bool method_set = false;
  bool psd = false;
  std::vector<std::string> overrides;
};

int cmd_recover(const RecoverArgs& a) {
  json cfg = json::object();
  if (!a.config.empty()) cfg = read_json_file(a.config);
  apply_overrides(cfg, a.overrides);
  require_keys(cfg, {"params", "covariance", "samples", "seed", "schedule", "complex", "method",
                     "psd_projection"},
               "recover config");
  if (a.seed_set) cfg["seed"] = a.seed;
  if (a.method_set || !cfg.contains("method")) cfg["method"] = a.method;
  cfg["psd_projection"] = cfg.value("psd_projection", false) || a.psd;

  onebit::OneBitBatch batch;
  if (!a.batch.empty()) {
    batch = onebit::load_batch(a.batch);
  } else {
    if (cfg.empty() || (!cfg.contains("params") && !cfg.contains("covariance"))) {
      throw UsageError("recover: give --batch FILE or a --config with params/covariance");
    }
    const auto n = cfg.value("samples", std::int64_t{1000});
    const auto seed = cfg.value("seed", std::uint64_t{1});
    Eigen::MatrixXd cov;
    if (cfg.contains("covariance")) {
      const auto rows = cfg.at("covariance").get<std::vector<std::vector<double>>>();
      cov.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) throw UsageError("covariance must be square");
        for (std::size_t j = 0; j < rows.size(); ++j) {
          cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
      }
    } else {
      cov = params_from_json(cfg.at("params")).covariance();
    }
    const int m = static_cast<int>(cov.rows());
    const onebit::ScheduleSpec spec =
        cfg.contains("schedule") ? schedule_spec_from_json(cfg.at("schedule"))
                                 : onebit::ScheduleSpec{};
    const onebit::ThresholdSchedule sched = spec.build(m, n);
    if (cfg.value("complex", false)) {
      batch = onebit::quantize_complex(
          onebit::sample_complex_gaussian(cov.cast<std::complex<double>>(), n, seed), sched,
          seed);
    } else {
      batch = onebit::quantize_real(onebit::sample_gaussian(cov, n, seed), sched, seed);
    }
    batch.seed = seed;
  }

  onebit::RecoveryOptions opts;
  opts.method = onebit::method_from_string(cfg.at("method").get<std::string>());
  opts.psd_projection = cfg.at("psd_projection").get<bool>();

  std::ostringstream csv;
  json meta;
  csv << "# config: " << cfg.dump() << '\n';
  if (batch.is_complex()) {
    const auto est = onebit::recover_complex(batch, opts);
    onebit::write_matrix_csv(csv, est);
    meta = onebit::to_json(est);
    meta["widely_linear"] = onebit::to_json(est.widely_linear);
  } else {
    const auto est = onebit::recover_matrix(batch, opts);
    onebit::write_matrix_csv(csv, est);
    meta = onebit::to_json(est);
  }
  meta["config"] = cfg;
  if (a.out.empty() || a.out == "-") {
    std::cout << csv.str() << meta.dump(2) << '\n';
  } else {
    onebit::write_file_atomic(a.out, csv.str());
    onebit::write_file_atomic(a.out + ".json", meta.dump(2) + "\n");
  }
  return 0;
}

// ---- predict --------------------------------------------------------------

struct PredictArgs {
  std::string config, schedule, method, out;
  bool first_order = false;
  std::vector<std::string> overrides;
};

int cmd_predict(const PredictArgs& a) {
  json cfg = json::object();
  if (!a.config.empty()) cfg = read_json_file(a.config);
  if (!a.schedule.empty()) cfg["schedule"] = read_json_file(a.schedule);
  apply_overrides(cfg, a.overrides);
  require_keys(cfg, {"params", "samples", "schedule", "method", "seed", "psd_projection"},
               "predict config");
  if (!cfg.contains("params")) throw UsageError("predict: config needs params");
  if (!cfg.contains("schedule")) throw UsageError("predict: give a schedule");
  const onebit::PairParams params = params_from_json(cfg.at("params"));
  const auto n = cfg.value("samples", std::int64_t{1000});
  const onebit::ScheduleSpec spec = schedule_spec_from_json(cfg.at("schedule"));
  std::string method = a.method;
  if (method.empty()) {
    method = cfg.value("method", std::string());
  }
  if (method.empty()) {
    switch (spec.kind) {
      case onebit::ScheduleKind::kConstant: method = "constant"; break;
      case onebit::ScheduleKind::kGaussianDither: method = "dither"; break;
      default: method = "time_varying"; break;
    }
  }
  cfg["method"] = method;
  cfg["samples"] = n;
  const auto report = onebit::predict_mse(
      params, spec.build(2, n), onebit::method_from_string(method),
      a.first_order ? onebit::TaylorMode::kFirstOrder : onebit::TaylorMode::kFull);
  json out = onebit::to_json(report);
  out["config"] = cfg;
  emit(a.out, out.dump(2) + "\n");
  if (report.rank_deficient) {
    std::cerr << "predict: Fisher information is rank deficient (condition "
              << report.fim_condition << ")\n";
    return kExitNumerical;
  }
  return 0;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  std::string config, builtin, out;
  int trials = 0, threads = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<std::string> overrides;
};

int cmd_bench(const BenchArgs& a) {
  if (a.config.empty() == a.builtin.empty()) {
    throw UsageError("bench: give exactly one of --config or --builtin");
  }
  json cfg = a.builtin.empty() ? read_json_file(a.config)
                               : onebit::to_json(onebit::builtin_config(a.builtin));
  if (a.trials > 0) cfg["trials"] = a.trials;
  if (a.seed_set) cfg["seed"] = a.seed;
  if (a.threads >= 0) cfg["threads"] = a.threads;
  if (!a.out.empty()) cfg["output"] = a.out;
  apply_overrides(cfg, a.overrides);
  const onebit::ExperimentConfig config = onebit::config_from_json(cfg);
  const onebit::BenchResult result = config.name == "table1" ? onebit::table1(config)
                                                             : onebit::run(config);
  if (config.output.empty()) onebit::write_csv(std::cout, result);
  bool all_ok = true;
  for (const auto& c : onebit::evaluate_checks(result)) {
    std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    all_ok &= c.passed;
  }
  return all_ok ? 0 : kExitAcceptance;
}

// ---- doa ------------------------------------------------------------------

struct DoaArgs {
  std::string config, out, angles_out;
  int trials = 20, threads = 0;
  std::uint64_t seed = 1;
  std::vector<std::string> overrides;
};

int cmd_doa(const DoaArgs& a) {
  json cfg = json::object();
  if (!a.config.empty()) cfg = read_json_file(a.config);
  apply_overrides(cfg, a.overrides);
  require_keys(cfg, {"sensors", "angles_deg", "snr_db", "snapshots", "coherent", "spacing"},
               "doa config");
  onebit::ArrayScenario s;
  s.sensors = cfg.value("sensors", s.sensors);
  s.angles_deg = cfg.value("angles_deg", s.angles_deg);
  s.snr_db = cfg.value("snr_db", s.snr_db);
  s.snapshots = cfg.value("snapshots", s.snapshots);
  s.coherent = cfg.value("coherent", s.coherent);
  s.spacing = cfg.value("spacing", s.spacing);
  const auto result =
      onebit::doa_pipeline(s, onebit::default_doa_methods(), a.trials, a.seed, a.threads);
  std::ostringstream rows;
  onebit::write_doa_csv(rows, result);
  emit(a.out, rows.str());
  if (!a.angles_out.empty()) {
    std::ostringstream angles;
    onebit::write_doa_angles_csv(angles, result);
    onebit::write_file_atomic(a.angles_out, angles.str());
  }
  return 0;
}

// ---- selftest -------------------------------------------------------------

int cmd_selftest(std::uint64_t seed, bool quick) {
  onebit::SelftestOptions o;
  o.seed = seed;
  o.include_scaling = !quick;
  bool ok = true;
  for (const auto& c : onebit::run_selftest(o)) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    ok &= c.passed;
  }
  return ok ? 0 : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-bit covariance recovery, performance prediction and experiments"};
  app.require_subcommand(1);

  RecoverArgs ra;
  auto* rec = app.add_subcommand("recover", "Estimate a covariance matrix from sign data");
  rec->add_option("--config", ra.config, "JSON config for synthetic data");
  rec->add_option("--batch", ra.batch, "Serialized one-bit batch");
  rec->add_option("--method", ra.method,
                  "arcsine | constant | dither | time_varying | time_varying_joint")
      ->each([&](const std::string&) { ra.method_set = true; });
  rec->add_option("--seed", ra.seed, "Seed for synthetic data")->each([&](const std::string&) {
    ra.seed_set = true;
  });
  rec->add_option("--out", ra.out, "Output CSV (metadata goes to OUT.json)");
  rec->add_flag("--psd", ra.psd, "Clip negative eigenvalues");
  rec->add_option("overrides", ra.overrides, "key=value config overrides");

  PredictArgs pa;
  auto* pred = app.add_subcommand("predict", "Predicted MSE from Taylor or Fisher analysis");
  pred->add_option("--config", pa.config, "JSON with params and samples");
  pred->add_option("--schedule", pa.schedule, "JSON threshold schedule");
  pred->add_option("--method", pa.method, "Estimator (defaults from the schedule kind)");
  pred->add_option("--out", pa.out, "Output JSON");
  pred->add_flag("--first-order", pa.first_order, "First-order Taylor variance for sigma_i");
  pred->add_option("overrides", pa.overrides, "key=value config overrides");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Monte Carlo experiments");
  bench->add_option("--config", ba.config, "Experiment JSON");
  bench->add_option("--builtin", ba.builtin, "fig1 | fig2 | fig3 | fig4 | fig5 | table1");
  bench->add_option("--trials", ba.trials, "Trials per point");
  bench->add_option("--seed", ba.seed, "Base seed")->each([&](const std::string&) {
    ba.seed_set = true;
  });
  bench->add_option("--threads", ba.threads, "Worker threads (0: all cores)");
  bench->add_option("--out", ba.out, "Output CSV");
  bench->add_option("overrides", ba.overrides, "key=value config overrides");

  DoaArgs da;
  auto* doa = app.add_subcommand("doa", "Direction-of-arrival demo");
  doa->add_option("--config", da.config, "Scenario JSON");
  doa->add_option("--trials", da.trials, "Trials");
  doa->add_option("--seed", da.seed, "Base seed");
  doa->add_option("--threads", da.threads, "Worker threads (0: all cores)");
  doa->add_option("--out", da.out, "RMSE CSV");
  doa->add_option("--angles-out", da.angles_out, "Per-trial angle CSV");
  doa->add_option("overrides", da.overrides, "key=value scenario overrides");

  std::uint64_t st_seed = 20240601;
  bool st_quick = false;
  auto* st = app.add_subcommand("selftest", "Run the invariant suite");
  st->add_option("--seed", st_seed, "Seed for random test points");
  st->add_flag("--quick", st_quick, "Skip the Monte Carlo scaling check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*rec) return cmd_recover(ra);
    if (*pred) return cmd_predict(pa);
    if (*bench) return cmd_bench(ba);
    if (*doa) return cmd_doa(da);
    if (*st) return cmd_selftest(st_seed, st_quick);
  } catch (const onebit::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const onebit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
