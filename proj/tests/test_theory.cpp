#include <doctest.h>

#include <cmath>

#include <boost/math/distributions/binomial.hpp>

#include "onebit/error.hpp"
#include "onebit/gauss.hpp"
#include "onebit/likelihood.hpp"
#include "onebit/theory.hpp"

using namespace onebit;

TEST_SUITE("theory") {

TEST_CASE("Stirling numbers of the second kind") {
  CHECK(stirling2(4, 2) == 7.0);
  CHECK(stirling2(5, 3) == 25.0);
  CHECK(stirling2(4, 4) == 1.0);
  CHECK(stirling2(4, 0) == 0.0);
  CHECK(stirling2(0, 0) == 1.0);
}

TEST_CASE("binomial moments against pmf enumeration") {
  for (int n : {1, 5, 17, 30}) {
    for (double p : {0.02, 0.3, 0.5, 0.91}) {
      boost::math::binomial_distribution<double> d(n, p);
      for (int c = 1; c <= 4; ++c) {
        double ref = 0.0;
        for (int k = 0; k <= n; ++k) ref += std::pow(double(k), c) * boost::math::pdf(d, k);
        CHECK(binomial_raw_moment(p, n, c) == doctest::Approx(ref).epsilon(1e-13));
      }
      const auto m = binomial_moments(p, n);
      CHECK(m.m1 == doctest::Approx(p).epsilon(1e-14));
      CHECK(m.m2 == doctest::Approx(p * p + p * (1 - p) / n).epsilon(1e-13));
    }
  }
}

TEST_CASE("Taylor coefficients match finite differences of v / Q^-1") {
  const double sigma = 0.6, v = 0.5;
  const auto t = taylor_coeffs(sigma, v);
  CHECK(t.p == doctest::Approx(q(v / sigma)));
  auto h = [&](double a) { return v / q_inv(a); };
  const double e = 1e-5;
  CHECK(t.h_prime == doctest::Approx((h(t.p + e) - h(t.p - e)) / (2 * e)).epsilon(1e-7));
  CHECK(t.h_double_prime ==
        doctest::Approx((h(t.p + e) - 2 * h(t.p) + h(t.p - e)) / (e * e)).epsilon(1e-4));
}

// References: p(1-p) sigma^2 / (N h^2 phi(h)^2), 40-digit evaluation.
TEST_CASE("first-order variance references") {
  CHECK(taylor_var_sigma(1.0, 1.6, 1000, TaylorMode::kFirstOrder) ==
        doctest::Approx(1.6444957681554953e-3).epsilon(1e-12));
  CHECK(taylor_var_sigma(0.25, 0.3, 1000, TaylorMode::kFirstOrder) ==
        doctest::Approx(1.1720641873803784e-4).epsilon(1e-12));
  CHECK(taylor_var_sigma(0.6, 0.5, 1000, TaylorMode::kFirstOrder) ==
        doctest::Approx(1.0527353294804898e-3).epsilon(1e-12));
  CHECK_THROWS_AS(taylor_var_sigma(1.0, 0.0, 1000), UnidentifiableError);
}

TEST_CASE("full and first-order expansions agree as N grows") {
  const double a = taylor_var_sigma(0.6, 0.5, 1000000, TaylorMode::kFull);
  const double b = taylor_var_sigma(0.6, 0.5, 1000000, TaylorMode::kFirstOrder);
  CHECK(a == doctest::Approx(b).epsilon(1e-4));
}

TEST_CASE("optimal constant threshold is about 1.6 sigma") {
  // argmin of p(1-p) / (h^2 phi(h)^2) is h = 1.5750362625874817
  CHECK(taylor_optimal_threshold(1.0, 1000000, 0.5, 3.0, TaylorMode::kFirstOrder) ==
        doctest::Approx(1.5750362625874817).epsilon(1e-6));
  CHECK(taylor_optimal_threshold(0.25, 1000, 0.02, 1.0) / 0.25 ==
        doctest::Approx(1.6).epsilon(0.1 / 1.6));
}

TEST_CASE("per-sample FIM equals the expected outer product of scores") {
  const PairParams p{0.8, 0.9, 0.25};
  for (auto [v1, v2] : {std::pair{0.3, 0.7}, std::pair{-0.4, 0.1}, std::pair{0.0, 0.5}}) {
    Eigen::Matrix3d ref = Eigen::Matrix3d::Zero();
    for (auto [x1, x2] : kOutcomes) {
      const auto t = likelihood_terms(p, v1, v2, x1, x2);
      ref += t.o * t.score * t.score.transpose();
    }
    CHECK((fim_sample(p, v1, v2) - ref).norm() < 1e-12 * ref.norm());
  }
}

TEST_CASE("schedule FIM sums per-sample information") {
  const PairParams p{0.8, 0.9, 0.25};
  const auto s = ThresholdSchedule::staircase(2, 1000, {0.2, 0.6});
  const Eigen::Matrix3d f = fim(p, s);
  const Eigen::Matrix3d ref = 500.0 * (fim_sample(p, 0.2, 0.2) + fim_sample(p, 0.6, 0.6));
  CHECK((f - ref).norm() < 1e-10 * ref.norm());
  CHECK_THROWS(fim(p, ThresholdSchedule::gaussian_dither(2, 1000, 0.5, {0.3, 0.3})));
}

TEST_CASE("zero thresholds leave the scales unidentified") {
  const auto r = fim_report(PairParams::from_rho(0.8, 0.9, 0.0), ThresholdSchedule::zero(2, 1000));
  CHECK(r.rank_deficient);
  CHECK(std::isnan(r.mse_sigma1));
  CHECK(r.fim.row(0).norm() < 1e-12);
  CHECK(r.fim.row(1).norm() < 1e-12);
}

TEST_CASE("predict_mse dispatch") {
  const PairParams p{0.25, 0.6, -0.08};
  const std::int64_t n = 1000;
  const auto c = predict_mse(p, ThresholdSchedule::constant(2, n, 0.3), Method::kConstant);
  CHECK(c.source == TheorySource::kTaylor);
  CHECK(c.mse_sigma1 == doctest::Approx(taylor_var_sigma(0.25, 0.3, n)));
  const auto c12 = taylor_var_sigma12(p, 0.3, 0.3, n);
  CHECK(c.mse_sigma12 == doctest::Approx(c12.mse_sigma12));
  CHECK(c12.r_matrix.isApprox(c12.r_matrix.transpose()));

  const auto tv = predict_mse(p, ThresholdSchedule::staircase(2, n, {0.1, 0.5, 1.0, 1.5, 2.0}),
                              Method::kTimeVarying);
  CHECK(tv.source == TheorySource::kFim);
  CHECK_FALSE(tv.rank_deficient);
  CHECK((tv.fim - tv.fim.transpose()).norm() == 0.0);

  const auto d = predict_mse(p, ThresholdSchedule::gaussian_dither(2, n, 0.5, {0.3, 0.3}),
                             Method::kDither);
  CHECK(d.shifted);
  CHECK(d.effective_params.sigma1 == doctest::Approx(std::sqrt(0.0625 + 0.09)));
  CHECK(d.effective_params.sigma12 == p.sigma12);

  CHECK_THROWS_AS(predict_mse(p, ThresholdSchedule::zero(2, n), Method::kArcsine), UsageError);
}

}  // TEST_SUITE
