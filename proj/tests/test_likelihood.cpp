#include <doctest.h>

#include <cmath>

#include "onebit/gauss.hpp"
#include "onebit/likelihood.hpp"
#include "onebit/rng.hpp"

using namespace onebit;

namespace {

double outcome_prob(const PairParams& p, double v1, double v2, int x1, int x2) {
  const double k1 = x1 * v1 / p.sigma1;
  const double k2 = x2 * v2 / p.sigma2;
  return bvn_orthant(k1, k2, x1 * x2 * p.rho());
}

PairParams perturb(PairParams p, int k, double h) {
  if (k == 0) p.sigma1 += h;
  if (k == 1) p.sigma2 += h;
  if (k == 2) p.sigma12 += h;
  return p;
}

}  // namespace

TEST_SUITE("likelihood") {

TEST_CASE("counts group samples by threshold in order of appearance") {
  OneBitBatch b;
  b.channels = 2;
  b.samples = 6;
  b.re = {1, -1, 1, 1, -1, -1,
          1, 1, -1, -1, -1, 1};
  Eigen::MatrixXd v(2, 6);
  v << 0.5, 0.5, 0.1, 0.1, 0.5, 0.1,
       0.2, 0.2, 0.2, 0.3, 0.3, 0.3;
  b.schedule = ThresholdSchedule::explicit_values(v);
  const auto c = channel_counts(b, 0);
  REQUIRE(c.groups.size() == 2);
  CHECK(c.groups[0].v == 0.5);
  CHECK(c.groups[0].n_plus == 1);
  CHECK(c.groups[0].n_minus == 2);
  CHECK(c.groups[1].n_plus == 2);
  CHECK(c.total() == 6);

  const auto pc = pair_counts(b, 0, 1);
  CHECK(pc.total() == 6);
  CHECK(pc.groups.size() == 4);
  CHECK(pc.first().total() == 6);
  CHECK(pc.second().groups.size() == 2);
}

TEST_CASE("outcome probabilities form a distribution") {
  Rng r(3);
  for (int i = 0; i < 50; ++i) {
    const PairParams p = PairParams::from_rho(0.2 + r.uniform(), 0.2 + r.uniform(),
                                              1.9 * r.uniform() - 0.95);
    const double v1 = 2 * r.normal() * 0.5, v2 = r.normal() * 0.5;
    double total = 0.0;
    for (auto [x1, x2] : kOutcomes) {
      const auto t = likelihood_terms(p, v1, v2, x1, x2);
      CHECK(t.o == doctest::Approx(outcome_prob(p, v1, v2, x1, x2)).epsilon(1e-13));
      total += t.o;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("scores match finite differences of log o") {
  Rng r(11);
  for (int i = 0; i < 40; ++i) {
    const PairParams p = PairParams::from_rho(0.3 + r.uniform(), 0.3 + r.uniform(),
                                              1.6 * r.uniform() - 0.8);
    const double v1 = 0.6 * r.normal(), v2 = 0.6 * r.normal();
    for (auto [x1, x2] : kOutcomes) {
      const auto t = likelihood_terms(p, v1, v2, x1, x2);
      for (int k = 0; k < 3; ++k) {
        const double h = 1e-6;
        const double fd = (std::log(outcome_prob(perturb(p, k, h), v1, v2, x1, x2)) -
                           std::log(outcome_prob(perturb(p, k, -h), v1, v2, x1, x2))) /
                          (2 * h);
        CHECK(std::abs(fd - t.score[k]) <= 1e-6 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("pair_loglik gradient matches finite differences") {
  PairCounts c;
  c.groups.push_back({0.2, 0.4, {120, 80, 60, 240}});
  c.groups.push_back({-0.3, 0.1, {300, 50, 70, 80}});
  const PairParams p{0.7, 0.9, 0.2};
  const auto l = pair_loglik(c, p);
  for (int k = 0; k < 3; ++k) {
    const double h = 1e-6;
    const double fd = (pair_loglik(c, perturb(p, k, h), false).value -
                       pair_loglik(c, perturb(p, k, -h), false).value) /
                      (2 * h);
    CHECK(l.grad[k] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("scalar log-likelihood derivatives") {
  ChannelCounts c;
  c.groups.push_back({0.3, 400, 600});
  c.groups.push_back({0.9, 100, 900});
  const double s = 0.8, h = 1e-5;
  const auto d = channel_loglik(c, s);
  const auto dp = channel_loglik(c, s + h), dm = channel_loglik(c, s - h);
  CHECK(d.d1 == doctest::Approx((dp.value - dm.value) / (2 * h)).epsilon(1e-7));
  CHECK(d.d2 == doctest::Approx((dp.d1 - dm.d1) / (2 * h)).epsilon(1e-6));

  PairCounts pc;
  pc.groups.push_back({0.2, 0.4, {120, 80, 60, 240}});
  const auto e = pair_loglik_sigma12(pc, 0.7, 0.9, 0.2);
  const auto ep = pair_loglik_sigma12(pc, 0.7, 0.9, 0.2 + h);
  const auto em = pair_loglik_sigma12(pc, 0.7, 0.9, 0.2 - h);
  CHECK(e.d1 == doctest::Approx((ep.value - em.value) / (2 * h)).epsilon(1e-7));
  CHECK(e.d2 == doctest::Approx((ep.d1 - em.d1) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("impossible patterns give minus infinity") {
  PairCounts c;
  c.groups.push_back({0.0, 0.0, {10, 5, 0, 0}});
  // rho -> +1 leaves no mass on (+,-)
  const auto l = pair_loglik(c, PairParams{1.0, 1.0, 1.0}, false);
  CHECK(std::isinf(l.value));
  CHECK(l.value < 0);
}

}  // TEST_SUITE
