#include <doctest.h>

#include <cmath>
#include <set>

#include "onebit/error.hpp"
#include "onebit/rng.hpp"
#include "onebit/schedule.hpp"

using namespace onebit;

TEST_SUITE("rng") {

// Random123 known-answer vectors for philox4x32-10.
TEST_CASE("Philox4x32-10 known answers") {
  using B = Philox4x32::Block;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::generate(B{0, 0, 0, 0}, K{0, 0}) ==
        B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::generate(B{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                             K{0xffffffffu, 0xffffffffu}) ==
        B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::generate(B{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                             K{0xa4093822u, 0x299f31d0u}) ==
        B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  Rng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
  }
}

TEST_CASE("uniform and normal moments") {
  Rng r(7);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, sn4 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
    sn4 += z * z * z * z;
  }
  CHECK(std::abs(su / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(sn / n) < 5 / std::sqrt(n));
  CHECK(std::abs(sn2 / n - 1.0) < 5 * std::sqrt(2.0 / n));
  CHECK(std::abs(sn4 / n - 3.0) < 5 * std::sqrt(96.0 / n));
}

}  // TEST_SUITE

TEST_SUITE("schedule") {

TEST_CASE("staircase holds each level for an equal share") {
  const auto s = ThresholdSchedule::staircase(2, 100, {0.1, 0.2, 0.3, 0.4});
  CHECK(s.nominal(0, 0) == 0.1);
  CHECK(s.nominal(1, 24) == 0.1);
  CHECK(s.nominal(0, 25) == 0.2);
  CHECK(s.nominal(1, 99) == 0.4);
  const auto m = s.materialize();
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 100);
  std::set<double> distinct(m.data(), m.data() + m.size());
  CHECK(distinct.size() == 4);
  CHECK_THROWS_AS(ThresholdSchedule::staircase(2, 101, {0.1, 0.2}), UsageError);
}

TEST_CASE("scaling, selection and widely linear stacking") {
  const auto s = ThresholdSchedule::sine(3, 50, 0.8, 10.0, 0.1).scaled({1.0, 2.0, 0.5});
  CHECK(s.nominal(1, 3) == doctest::Approx(2.0 * (0.1 + 0.8 * std::sin(2 * M_PI * 3 / 10.0))));
  const auto sel = s.select({2, 0});
  CHECK(sel.channels() == 2);
  CHECK(sel.nominal(0, 7) == s.nominal(2, 7));
  CHECK(sel.nominal(1, 7) == s.nominal(0, 7));
  const auto st = s.stacked_real_imag();
  CHECK(st.channels() == 6);
  for (int i = 0; i < 3; ++i) CHECK(st.nominal(i + 3, 11) == s.nominal(i, 11));
}

TEST_CASE("dither records mean and deviation only") {
  const auto s = ThresholdSchedule::gaussian_dither(2, 10, 0.5, {0.3, 0.4});
  CHECK(s.is_random());
  CHECK(s.nominal(1, 4) == 0.5);
  CHECK(s.constant_value().value() == 0.5);
  CHECK(s.dither_stddev()[1] == 0.4);
  CHECK_FALSE(ThresholdSchedule::constant(2, 10, 0.5).is_random());
  CHECK(ThresholdSchedule::zero(2, 10).is_zero());
  CHECK_FALSE(ThresholdSchedule::constant(2, 10, 0.5).is_zero());
}

TEST_CASE("kind names round trip") {
  for (auto k : {ScheduleKind::kZero, ScheduleKind::kConstant, ScheduleKind::kStaircase,
                 ScheduleKind::kGaussianDither, ScheduleKind::kSine, ScheduleKind::kExplicit}) {
    CHECK(schedule_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(schedule_kind_from_string("ramp"), UsageError);
}

}  // TEST_SUITE
