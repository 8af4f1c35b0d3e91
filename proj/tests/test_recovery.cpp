#include <doctest.h>

#include <cmath>

#include "onebit/error.hpp"
#include "onebit/gauss.hpp"
#include "onebit/quantizer.hpp"
#include "onebit/recovery.hpp"
#include "onebit/theory.hpp"

using namespace onebit;

namespace {

// Counts proportional to the exact outcome probabilities, so the MLE of
// these "data" is the generating parameter up to rounding.
PairCounts expected_counts(const PairParams& p, const std::vector<double>& levels,
                           double per_level) {
  PairCounts c;
  for (double v : levels) {
    PairGroup g{v, v, {}};
    for (int k = 0; k < 4; ++k) {
      const auto [x1, x2] = kOutcomes[k];
      const double o = bvn_orthant(x1 * v / p.sigma1, x2 * v / p.sigma2, x1 * x2 * p.rho());
      g.n[k] = std::llround(o * per_level);
    }
    c.groups.push_back(g);
  }
  return c;
}

const std::vector<double> kStair{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

}  // namespace

TEST_SUITE("recovery") {

TEST_CASE("const_sigma inverts the exceedance probability") {
  CHECK(const_sigma(q(2.0), 1.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(const_sigma(q(-1.5), -0.3) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK_THROWS_AS(const_sigma(0.0, 0.5), SaturationError);
  CHECK_THROWS_AS(const_sigma(1.0, 0.5), SaturationError);
  CHECK_THROWS_AS(const_sigma(0.5, 0.5), IllPosedError);
  CHECK_THROWS_AS(const_sigma(0.7, 0.5), IllPosedError);
  CHECK_THROWS_AS(const_sigma(0.3, 0.0), UnidentifiableError);
}

TEST_CASE("orthant series agrees with the exact orthant probability") {
  const double h1 = 0.3 / 0.25, h2 = 0.3 / 0.6;
  const auto c = orthant_series_coefficients(h1, h2, 30);
  REQUIRE(c.size() == 32);
  for (double r : {-0.6, -0.2, 0.3, 0.5}) {
    double s = 0.0, pw = 1.0;
    for (double ci : c) {
      s += ci * pw;
      pw *= r;
    }
    CHECK(s == doctest::Approx(bvn_orthant(h1, h2, r)).epsilon(1e-10));
  }
  CHECK(c[0] == doctest::Approx(q(h1) * q(h2)).epsilon(1e-15));
}

TEST_CASE("const_rho recovers rho from the exact p12") {
  for (double v : {0.1, 0.3, 0.5}) {
    for (double r : {-0.53, 0.0, 0.4, 0.8}) {
      const double p12 = bvn_orthant(v / 0.25, v / 0.6, r);
      CHECK(const_rho(p12, v, v, 0.25, 0.6, 80).rho == doctest::Approx(r).epsilon(1e-8));
      CHECK(std::abs(const_rho(p12, v, v, 0.25, 0.6).rho - r) < 1e-3);
    }
  }
}

TEST_CASE("Newton stages return the generating parameters on exact counts") {
  const PairParams p = PairParams::from_rho(0.25, 0.6, 0.5);
  const auto c = expected_counts(p, kStair, 1e12);
  NewtonOptions opt;
  const auto s1 = mle_sigma_newton(c.first(), initial_sigma(c.first()), opt);
  const auto s2 = mle_sigma_newton(c.second(), initial_sigma(c.second()), opt);
  CHECK(s1.converged);
  CHECK(s2.converged);
  CHECK(s1.estimate == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(s2.estimate == doctest::Approx(0.6).epsilon(1e-6));
  const auto s12 = mle_sigma12_newton(c, s1.estimate, s2.estimate,
                                      initial_sigma12(c, s1.estimate, s2.estimate), opt);
  CHECK(s12.converged);
  CHECK(s12.estimate == doctest::Approx(p.sigma12).epsilon(1e-5));

  const auto j = joint_mle(c, PairParams{0.27, 0.55, 0.05});
  CHECK_FALSE(j.line_search_failed);
  CHECK(j.params.sigma1 == doctest::Approx(0.25).epsilon(1e-4));
  CHECK(j.params.sigma2 == doctest::Approx(0.6).epsilon(1e-4));
  CHECK(j.params.sigma12 == doctest::Approx(p.sigma12).epsilon(1e-3));
}

TEST_CASE("estimate_pair is within a few standard errors on simulated data") {
  const PairParams p{0.8, 0.9, 0.25};
  const std::int64_t n = 100000;
  const auto schedule = ThresholdSchedule::staircase(2, n, kStair);
  const auto batch = quantize_real(sample_gaussian(p, n, 17), schedule);
  const auto report = fim_report(p, schedule);
  for (Method m : {Method::kTimeVarying, Method::kTimeVaryingJoint}) {
    RecoveryOptions o;
    o.method = m;
    const auto e = estimate_pair(batch, 0, 1, o);
    CHECK(std::abs(e.params.sigma1 - p.sigma1) < 5 * std::sqrt(report.mse_sigma1));
    CHECK(std::abs(e.params.sigma2 - p.sigma2) < 5 * std::sqrt(report.mse_sigma2));
    CHECK(std::abs(e.params.sigma12 - p.sigma12) < 5 * std::sqrt(report.mse_sigma12));
  }
}

TEST_CASE("constant, dither and arcsine methods") {
  const PairParams p{0.8, 0.9, 0.25};
  const std::int64_t n = 200000;
  const auto y = sample_gaussian(p, n, 23);

  RecoveryOptions o;
  o.method = Method::kConstant;
  const auto c = recover_matrix(quantize_real(y, ThresholdSchedule::constant(2, n, 0.5)), o);
  CHECK(c.covariance(0, 0) == doctest::Approx(0.64).epsilon(0.02));
  CHECK(c.covariance(0, 1) == doctest::Approx(0.25).epsilon(0.05));
  CHECK(c.covariance(0, 1) == c.covariance(1, 0));

  o.method = Method::kDither;
  const auto d = recover_matrix(
      quantize_real(y, ThresholdSchedule::gaussian_dither(2, n, 0.5, {0.3, 0.3}), 5), o);
  CHECK(d.covariance(1, 1) == doctest::Approx(0.81).epsilon(0.03));
  CHECK(d.covariance(0, 1) == doctest::Approx(0.25).epsilon(0.06));

  const Eigen::MatrixXd a = arcsine_real(quantize_real(y, ThresholdSchedule::zero(2, n)));
  CHECK(a(0, 0) == 1.0);
  CHECK(a(0, 1) == doctest::Approx(p.rho()).epsilon(0.02));

  o.method = Method::kTimeVarying;
  CHECK_THROWS_AS(recover_matrix(quantize_real(y, ThresholdSchedule::zero(2, n)), o),
                  UnidentifiableError);
}

TEST_CASE("matrix assembly for three channels") {
  Eigen::Matrix3d s;
  s << 1.0, 0.3, -0.2,
       0.3, 0.5, 0.1,
      -0.2, 0.1, 2.0;
  const std::int64_t n = 100000;
  const auto b = quantize_real(sample_gaussian(s, n, 31),
                               ThresholdSchedule::staircase(3, n, {0.2, 0.6, 1.0, 1.4}));
  RecoveryOptions o;
  o.method = Method::kTimeVaryingJoint;
  const auto e = recover_matrix(b, o);
  CHECK(e.pairs.size() == 3);
  CHECK((e.covariance - e.covariance.transpose()).norm() == 0.0);
  CHECK((e.covariance - s).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("complex widely linear recovery") {
  Eigen::Matrix2cd c;
  c << 1.0, std::complex<double>(0.3, -0.4), std::complex<double>(0.3, 0.4), 0.6;
  const std::int64_t n = 100000;
  const auto b = quantize_complex(sample_complex_gaussian(c, n, 41),
                                  ThresholdSchedule::staircase(2, n, {0.2, 0.5, 0.8, 1.1}));
  const auto e = recover_complex(b);
  CHECK(e.hermitian_enforced);
  CHECK((e.covariance - e.covariance.adjoint()).norm() < 1e-15);
  CHECK(std::abs(e.covariance(0, 1) - c(0, 1)) < 0.03);
  CHECK(std::abs(e.covariance(1, 1) - c(1, 1)) < 0.03);

  const auto a = arcsine_complex(quantize_complex(sample_complex_gaussian(c, n, 41),
                                                  ThresholdSchedule::zero(2, n)));
  const std::complex<double> r = c(0, 1) / std::sqrt(0.6);
  CHECK(std::abs(a(0, 1) - r) < 0.02);
}

TEST_CASE("PSD projection clips negative eigenvalues") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 2.0, 1.0;
  CHECK(project_psd(m));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  CHECK(es.eigenvalues().minCoeff() > -1e-14);
  CHECK(m(0, 0) == doctest::Approx(1.5));
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  CHECK_FALSE(project_psd(id));
}

TEST_CASE("method names round trip") {
  for (Method m : {Method::kArcsine, Method::kConstant, Method::kDither, Method::kTimeVarying,
                   Method::kTimeVaryingJoint}) {
    CHECK(method_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(method_from_string("magic"), UsageError);
}

}  // TEST_SUITE
