#include <doctest.h>

#include <cmath>

#include "onebit/bench.hpp"
#include "onebit/error.hpp"

using namespace onebit;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.name = "small";
  c.params = PairParams{0.25, 0.6, -0.08};
  c.samples = 400;
  c.trials = 24;
  c.base_seed = 9;
  c.threads = 1;
  c.sweep = SweepVariable::kThreshold;
  c.sweep_values = {0.3, 0.5};
  MethodSpec tv{"time_varying", Method::kTimeVarying, {}};
  tv.schedule.kind = ScheduleKind::kStaircase;
  tv.schedule.levels = {0.1, 0.3, 0.5, 0.7};
  MethodSpec k{"constant", Method::kConstant, {}};
  k.schedule.kind = ScheduleKind::kConstant;
  k.schedule.value = 0.5;
  c.methods = {tv, k};
  return c;
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("config JSON round trip and strict keys") {
  const auto c = small_config();
  const auto j = to_json(c);
  const auto back = config_from_json(j);
  CHECK(to_json(back) == j);

  auto bad = j;
  bad["trails"] = 10;
  CHECK_THROWS_AS(config_from_json(bad), UsageError);
  auto bad_method = j;
  bad_method["methods"][0]["schedul"] = nlohmann::json::object();
  CHECK_THROWS_AS(config_from_json(bad_method), UsageError);
}

TEST_CASE("every builtin validates") {
  for (const auto& name : builtin_names()) {
    CHECK_NOTHROW(builtin_config(name).validate());
  }
  CHECK_THROWS_AS(builtin_config("fig9"), UsageError);
}

TEST_CASE("sweeps rewrite the right quantity") {
  auto c = small_config();
  CHECK(c.schedule_at(c.methods[1], 0.3).value == 0.3);
  CHECK(c.schedule_at(c.methods[0], 0.3).levels == c.methods[0].schedule.levels);
  c.sweep = SweepVariable::kDelta;
  c.params = PairParams::from_rho(0.6, 0.6, 0.5);
  const auto p = c.params_at(0.2);
  CHECK(p.sigma1 == doctest::Approx(0.8));
  CHECK(p.sigma2 == doctest::Approx(0.4));
  CHECK(p.rho() == doctest::Approx(0.5));
  c.sweep = SweepVariable::kSamples;
  CHECK(c.samples_at(3000) == 3000);
}

namespace {

std::string data_rows(const std::string& csv) {
  return csv.substr(csv.find("\nexperiment,"));
}

}  // namespace

TEST_CASE("runs are bit-identical across repetitions and thread counts") {
  auto c = small_config();
  const std::string a = csv_string(run(c));
  CHECK(a == csv_string(run(c)));
  c.threads = 3;
  CHECK(data_rows(a) == data_rows(csv_string(run(c))));
  c.base_seed = 10;
  CHECK(data_rows(a) != data_rows(csv_string(run(c))));
}

TEST_CASE("rows carry counts, standard errors and theory") {
  auto c = small_config();
  c.theory = true;
  const auto r = compare_theory(c);
  CHECK(r.rows.size() == 2 * 2 * 3);
  const auto& row = r.row("constant", "sigma2", 0.5);
  CHECK(row.trials + row.failed == 24);
  CHECK(row.se > 0.0);
  CHECK(row.theory_mse > 0.0);
  CHECK(row.ratio == doctest::Approx(row.mse / row.theory_mse));
}

TEST_CASE("failed trials are excluded and counted") {
  auto c = small_config();
  c.samples = 20;
  c.sweep = SweepVariable::kNone;
  c.sweep_values.clear();
  c.methods[1].schedule.value = 0.5;
  const auto r = run(c);
  const auto& row = r.row("constant", "sigma1");
  CHECK(row.failed > 0);
  CHECK(row.trials + row.failed == 24);
  CHECK(std::isfinite(row.mse));
}

TEST_CASE("CSV layout") {
  const std::string s = csv_string(run(small_config()));
  CHECK(s.rfind("# config: ", 0) == 0);
  CHECK(s.find("\nexperiment,method,sweep,sweep_value,parameter,N,trials,failed,mse,se,"
               "theory_mse,ratio,base_seed\n") != std::string::npos);
  CHECK(s.find("small,constant,threshold,0.3,sigma12,400,") != std::string::npos);
}

}  // TEST_SUITE
