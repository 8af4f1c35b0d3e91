#include <doctest.h>

#include <cmath>
#include <sstream>

#include "onebit/batch_io.hpp"
#include "onebit/error.hpp"
#include "onebit/quantizer.hpp"

using namespace onebit;

TEST_SUITE("quantizer") {

TEST_CASE("signs follow y >= v") {
  Eigen::MatrixXd y(2, 4);
  y << 0.5, -0.1, 0.2, 0.0,
       1.0, 0.3, -2.0, 0.3;
  Eigen::MatrixXd v(2, 4);
  v << 0.4, -0.1, 0.3, 0.0,
       1.1, 0.2, -3.0, 0.3;
  const auto b = quantize_real(y, ThresholdSchedule::explicit_values(v));
  const int expect[2][4] = {{1, 1, -1, 1}, {-1, 1, 1, 1}};
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < 4; ++t) CHECK(b.sign(i, t) == expect[i][t]);
  CHECK_NOTHROW(b.validate());
}

TEST_CASE("sample covariance converges") {
  const PairParams p{0.8, 1.3, -0.5};
  const auto y = sample_gaussian(p, 200000, 5);
  const Eigen::Matrix2d s = y * y.transpose() / 200000.0;
  CHECK(s(0, 0) == doctest::Approx(0.64).epsilon(0.02));
  CHECK(s(1, 1) == doctest::Approx(1.69).epsilon(0.02));
  CHECK(s(0, 1) == doctest::Approx(-0.5).epsilon(0.03));
  CHECK(sample_gaussian(p, 10, 5) == sample_gaussian(p, 10, 5));
  CHECK(sample_gaussian(p, 10, 5) != sample_gaussian(p, 10, 5, 1));

  Eigen::Matrix2d bad;
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(sample_gaussian(bad, 10, 1), MatrixError);
}

TEST_CASE("complex sampling is circular with the requested covariance") {
  Eigen::Matrix2cd c;
  c << 1.0, std::complex<double>(0.3, 0.4), std::complex<double>(0.3, -0.4), 0.9;
  const int n = 200000;
  const auto y = sample_complex_gaussian(c, n, 9);
  const Eigen::Matrix2cd s = y * y.adjoint() / double(n);
  CHECK(std::abs(s(0, 1) - c(0, 1)) < 0.01);
  const Eigen::Matrix2cd pseudo = y * y.transpose() / double(n);
  CHECK(pseudo.cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("widely linear view stacks real and imaginary planes") {
  Eigen::MatrixXcd y(2, 3);
  y << std::complex<double>(1, -1), std::complex<double>(-1, 1), std::complex<double>(0.5, 0.5),
       std::complex<double>(-0.2, 0.2), std::complex<double>(0.1, -0.3), std::complex<double>(2, 2);
  const auto b = quantize_complex(y, ThresholdSchedule::zero(2, 3));
  CHECK(b.is_complex());
  const auto w = b.widely_linear();
  CHECK(w.channels == 4);
  CHECK_FALSE(w.is_complex());
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < 3; ++t) {
      CHECK(w.sign(i, t) == b.sign(i, t));
      CHECK(w.sign(i + 2, t) == b.sign_im(i, t));
    }
}

}  // TEST_SUITE

TEST_SUITE("batch_io") {

namespace {

OneBitBatch roundtrip(const OneBitBatch& b) {
  std::stringstream ss;
  write_batch_binary(ss, b);
  return read_batch_binary(ss);
}

void check_same(const OneBitBatch& a, const OneBitBatch& b) {
  CHECK(a.channels == b.channels);
  CHECK(a.samples == b.samples);
  CHECK(a.seed == b.seed);
  CHECK(a.re == b.re);
  CHECK(a.im == b.im);
  CHECK(a.schedule == b.schedule);
}

}  // namespace

TEST_CASE("binary round trip for every schedule kind") {
  const PairParams p{0.7, 1.1, 0.2};
  const auto y = sample_gaussian(p, 37, 3);
  Eigen::MatrixXd ev = Eigen::MatrixXd::Random(2, 37);
  const ThresholdSchedule schedules[] = {
      ThresholdSchedule::zero(2, 37),
      ThresholdSchedule::constant(2, 37, 0.3),
      ThresholdSchedule::staircase(2, 37, {0.5}).scaled({1.0, 1.5}),
      ThresholdSchedule::gaussian_dither(2, 37, 0.2, {0.1, 0.3}),
      ThresholdSchedule::sine(2, 37, 0.4, 9.0, -0.1),
      ThresholdSchedule::explicit_values(ev),
  };
  for (const auto& s : schedules) {
    auto b = quantize_real(y, s, 77);
    b.seed = 1234;
    check_same(b, roundtrip(b));
  }
  Eigen::Matrix2cd c = Eigen::Matrix2cd::Identity();
  auto cb = quantize_complex(sample_complex_gaussian(c, 37, 1), ThresholdSchedule::constant(2, 37, 0.1));
  check_same(cb, roundtrip(cb));
}

TEST_CASE("corrupt input is rejected") {
  std::stringstream bad("NOPE and some bytes");
  CHECK_THROWS_AS(read_batch_binary(bad), UsageError);

  auto b = quantize_real(sample_gaussian(PairParams{}, 16, 1), ThresholdSchedule::zero(2, 16));
  std::stringstream ss;
  write_batch_binary(ss, b);
  std::string bytes = ss.str();
  bytes.resize(bytes.size() - 3);
  std::stringstream truncated(bytes);
  CHECK_THROWS_AS(read_batch_binary(truncated), UsageError);
}

TEST_CASE("debug CSV header") {
  auto b = quantize_real(sample_gaussian(PairParams{}, 3, 1), ThresholdSchedule::constant(2, 3, 0.25));
  std::stringstream ss;
  write_batch_csv(ss, b);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "t,x1,x2,v1,v2");
  int rows = 0;
  for (std::string line; std::getline(ss, line);) ++rows;
  CHECK(rows == 3);
}

}  // TEST_SUITE
