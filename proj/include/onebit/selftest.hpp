#pragma once

#include <cstdint>
#include <vector>

#include "onebit/bench.hpp"

namespace onebit {

struct SelftestOptions {
  std::uint64_t seed = 20240601;
  int points = 100;           // random points per identity check
  int scaling_trials = 200;   // trials per n in the joint-vs-separate scaling check
  bool include_scaling = true;
};

// Invariant suite: analytic scores and curvatures against finite
// differences, the zero-mean score identity, orthant probabilities against
// an independent quadrature, binomial moments against direct summation,
// the joint-vs-separate gap scaling, and zero-threshold FIM rank deficiency.
std::vector<Check> run_selftest(const SelftestOptions& options = {});

// Individual groups, each returning one Check.
Check check_scores(const SelftestOptions& options);
Check check_second_derivatives(const SelftestOptions& options);
Check check_regularity(const SelftestOptions& options);
Check check_orthant_quadrature(const SelftestOptions& options);
Check check_price_identity(const SelftestOptions& options);
Check check_binomial_moments();
Check check_joint_gap_scaling(const SelftestOptions& options);
Check check_zero_threshold_fim();

// Quadrature reference for Pr{Y1 > k1, Y2 > k2} (adaptive Gauss-Kronrod on
// the conditional form).
double orthant_quadrature(double k1, double k2, double rho);

}  // namespace onebit
