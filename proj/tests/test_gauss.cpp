#include <doctest.h>

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "onebit/error.hpp"
#include "onebit/gauss.hpp"

using namespace onebit;

namespace {

// Pr{Y1 > k1, Y2 > k2} = int_{k1}^inf phi(y) Q((k2 - rho y) / sqrt(1 - rho^2)) dy
double orthant_oracle(double k1, double k2, double rho) {
  const double s = std::sqrt(1.0 - rho * rho);
  auto f = [&](double y) {
    return std::exp(-0.5 * y * y) / std::sqrt(2.0 * M_PI) *
           0.5 * std::erfc((k2 - rho * y) / s / std::sqrt(2.0));
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, k1, std::numeric_limits<double>::infinity(), 15, 1e-14);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_SUITE("gauss") {

// Reference tails from 40-digit erfc evaluations.
TEST_CASE("q matches high-precision references") {
  CHECK(rel(q(2.0), 0.02275013194817920720) < 1e-14);
  CHECK(rel(q(-1.5), 0.93319279873114193400) < 1e-14);
  CHECK(rel(q(8.0), 6.220960574271784124e-16) < 1e-12);
  CHECK(rel(q(30.0), 4.906713927148187060e-198) < 1e-11);
  CHECK(q(0.0) == doctest::Approx(0.5).epsilon(1e-16));
}

TEST_CASE("log_q and hazard stay finite in the far tail") {
  CHECK(rel(log_q(30.0), std::log(4.906713927148187060e-198)) < 1e-13);
  const double l = log_q(60.0);
  CHECK(std::isfinite(l));
  // Mills ratio: Q(a) ~ phi(a)/a (1 - 1/a^2)
  CHECK(l == doctest::Approx(-0.5 * 3600.0 - std::log(60.0 * std::sqrt(2 * M_PI)) +
                             std::log1p(-1.0 / 3600.0 + 3.0 / 3600.0 / 3600.0))
                 .epsilon(1e-10));
  CHECK(hazard(60.0) > 60.0);
  CHECK(hazard(60.0) < 60.0 + 1.0 / 60.0);
  CHECK(hazard(-5.0) == doctest::Approx(phi(-5.0) / q(-5.0)).epsilon(1e-14));
}

TEST_CASE("q_inv references and round trip") {
  CHECK(rel(q_inv(1e-10), 6.3613409024040562047) < 1e-13);
  CHECK(rel(q_inv(0.3), 0.52440051270804078404) < 1e-14);
  CHECK(q_inv(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  for (double lp = -300.0; lp < -0.31; lp += 0.37) {
    const double p = std::pow(10.0, lp);
    const double x = q_inv(p);
    // relative error of Q is amplified by about x^2 in the far tail
    CHECK(rel(q(x), p) < 1e-15 * (4.0 + x * x));
    if (p > 1e-15) CHECK(rel(q(q_inv(1.0 - p)), 1.0 - p) < 1e-15);
  }
  CHECK_THROWS_AS(q_inv(0.0), DomainError);
  CHECK_THROWS_AS(q_inv(1.0), DomainError);
  CHECK_THROWS_AS(q(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST_CASE("hermite matches explicit polynomials") {
  CHECK(hermite(0, 0.3) == 1.0);
  CHECK(hermite(1, 0.3) == doctest::Approx(0.6));
  CHECK(rel(hermite(5, 0.8), 24.565759999999994597) < 1e-14);
  CHECK(rel(hermite(12, -1.3), 1559295.4469715190189) < 1e-13);
}

TEST_CASE("bvn_orthant matches quadrature references") {
  // 40-digit quadrature values
  CHECK(std::abs(bvn_orthant(0.8, -0.2, 0.6) - 0.18776520880566902043) < 1e-14);
  CHECK(std::abs(bvn_orthant(-1.2, 0.4, -0.9) - 0.23142343753485050357) < 1e-14);
  CHECK(std::abs(bvn_orthant(0.0, 0.0, 0.3) - 0.29849334201033914279) < 1e-15);
  CHECK(rel(bvn_orthant(2.0, 0.5 / 0.6, -0.08 / 0.15), 1.6854712083974181e-4) < 1e-10);

  const double pts[][3] = {{0.1, 0.2, 0.95}, {-2.0, 1.5, -0.7}, {3.0, 3.0, 0.99},
                           {-0.5, -0.5, -0.999}, {1.0, -1.0, 0.0}, {0.7, 0.1, 0.5}};
  for (const auto& p : pts) {
    CHECK(std::abs(bvn_orthant(p[0], p[1], p[2]) - orthant_oracle(p[0], p[1], p[2])) < 1e-12);
  }
}

TEST_CASE("bvn_orthant symmetries") {
  for (double k1 = -2.0; k1 <= 2.0; k1 += 0.8) {
    for (double k2 = -1.7; k2 <= 2.0; k2 += 0.9) {
      for (double r = -0.9; r <= 0.95; r += 0.35) {
        const double p = bvn_orthant(k1, k2, r);
        CHECK(p == doctest::Approx(bvn_orthant(k2, k1, r)).epsilon(1e-14));
        CHECK(p + bvn_orthant(k1, -k2, -r) == doctest::Approx(q(k1)).epsilon(1e-13));
      }
      CHECK(bvn_orthant(k1, k2, 0.0) == doctest::Approx(q(k1) * q(k2)).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(bvn_orthant(0.0, 0.0, 1.0), DomainError);
}

TEST_CASE("bvn_orthant approaches the degenerate limits") {
  CHECK(bvn_orthant(0.3, -0.4, 1.0 - 1e-12) ==
        doctest::Approx(bvn_orthant_degenerate(0.3, -0.4, +1)).epsilon(1e-5));
  CHECK(bvn_orthant(-0.3, -0.4, -1.0 + 1e-12) ==
        doctest::Approx(bvn_orthant_degenerate(-0.3, -0.4, -1)).epsilon(1e-5));
  CHECK(bvn_orthant_degenerate(0.3, 0.4, -1) == 0.0);
}

TEST_CASE("Price identity: d orthant / d rho equals the density") {
  const double pts[][3] = {{0.8, -0.2, 0.6}, {-1.0, 0.5, -0.4}, {1.5, 1.2, 0.1}};
  for (const auto& p : pts) {
    const double h = 1e-5;
    const double fd = (bvn_orthant(p[0], p[1], p[2] + h) - bvn_orthant(p[0], p[1], p[2] - h)) /
                      (2 * h);
    CHECK(rel(fd, bvn_pdf(p[0], p[1], p[2])) < 1e-7);
    const double fd2 = (bvn_pdf(p[0], p[1], p[2] + h) - bvn_pdf(p[0], p[1], p[2] - h)) / (2 * h);
    CHECK(fd2 == doctest::Approx(bvn_pdf_drho(p[0], p[1], p[2])).epsilon(1e-7));
  }
}

TEST_CASE("g_fn is sigma1 times the derivative of p12 in sigma1 at fixed sigma12") {
  const double s1 = 0.7, s2 = 1.3, s12 = 0.3, v1 = 0.4, v2 = -0.2;
  const double h = 1e-6;
  auto p12 = [&](double s) { return bvn_orthant(v1 / s, v2 / s2, s12 / (s * s2)); };
  const double fd = (p12(s1 + h) - p12(s1 - h)) / (2 * h);
  CHECK(s1 * fd == doctest::Approx(g_fn(v1 / s1, v2 / s2, s12 / (s1 * s2))).epsilon(1e-7));
}

}  // TEST_SUITE
