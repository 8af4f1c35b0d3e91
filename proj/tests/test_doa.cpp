#include <doctest.h>

#include <cmath>
#include <sstream>

#include "onebit/doa.hpp"
#include "onebit/error.hpp"

using namespace onebit;

TEST_SUITE("doa") {

TEST_CASE("scenario power bookkeeping") {
  ArrayScenario s;
  CHECK_NOTHROW(s.validate());
  CHECK(s.noise_power() == doctest::Approx(3.0 / 100.0));
  CHECK(s.component_rms() == doctest::Approx(std::sqrt(3.03 / 2)));
  ArrayScenario bad = s;
  bad.sensors = 3;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = s;
  bad.angles_deg = {10, 10, 40};
  CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("steering vectors have unit-modulus entries and the ULA phase") {
  ArrayScenario s;
  const auto a = steering_matrix(s);
  CHECK(a.rows() == 6);
  CHECK(a.cols() == 3);
  CHECK((a.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-15);
  const double phase = 2 * M_PI * 0.5 * std::sin(45.0 * M_PI / 180.0);
  CHECK(std::arg(a(1, 1) / a(0, 1)) == doctest::Approx(phase));
}

TEST_CASE("exact covariance gives exact coherent angles") {
  ArrayScenario s;
  const auto cov = population_covariance(s, source_gains(s, 3));
  CHECK((cov - cov.adjoint()).norm() < 1e-14);
  const auto est = doa_estimate(cov, 3);
  REQUIRE(est.size() == 3);
  // signal roots are double roots on the unit circle, accurate to ~sqrt(eps)
  CHECK(std::abs(est[0] - 15.0) < 1e-5);
  CHECK(std::abs(est[1] - 45.0) < 1e-5);
  CHECK(std::abs(est[2] - 75.0) < 1e-5);
}

TEST_CASE("sample covariance of generated snapshots") {
  ArrayScenario s;
  s.snapshots = 20000;
  const auto y = gen_snapshots(s, 5);
  const Eigen::MatrixXcd r = y * y.adjoint() / double(s.snapshots);
  const auto cov = population_covariance(s, source_gains(s, 5));
  CHECK((r - cov).cwiseAbs().maxCoeff() < 0.1);
  const auto est = doa_estimate(r, 3);
  CHECK(std::abs(est[1] - 45.0) < 0.5);
}

TEST_CASE("pipeline is deterministic and reports every method") {
  ArrayScenario s;
  s.snapshots = 2000;
  const auto methods = default_doa_methods();
  const auto a = doa_pipeline(s, methods, 3, 8, 1);
  const auto b = doa_pipeline(s, methods, 3, 8, 2);
  std::ostringstream sa, sb;
  write_doa_csv(sa, a);
  write_doa_csv(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(a.trials.size() == 3 * methods.size());
  for (const auto& m : methods) CHECK(std::isfinite(a.rmse(m.label, 0)));
  CHECK(a.rmse("unquantized", 1) < a.rmse("constant", 1));
}

}  // TEST_SUITE
