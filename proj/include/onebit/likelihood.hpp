#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "onebit/quantizer.hpp"

namespace onebit {

// Sign patterns of a channel pair, in the order used by every count array:
// (+,+), (+,-), (-,+), (-,-).
inline constexpr std::array<std::array<int, 2>, 4> kOutcomes = {
    {{{+1, +1}}, {{+1, -1}}, {{-1, +1}}, {{-1, -1}}}};

// Samples of one channel that share a threshold value.
struct ChannelGroup {
  double v = 0.0;
  std::int64_t n_plus = 0;
  std::int64_t n_minus = 0;

  std::int64_t total() const { return n_plus + n_minus; }
};

// Sufficient statistic of one channel: counts per distinct threshold.
struct ChannelCounts {
  std::vector<ChannelGroup> groups;
  std::int64_t total() const;
};

// Samples of a channel pair that share the threshold pair (v1, v2).
struct PairGroup {
  double v1 = 0.0;
  double v2 = 0.0;
  std::array<std::int64_t, 4> n{};  // indexed like kOutcomes

  std::int64_t total() const { return n[0] + n[1] + n[2] + n[3]; }
};

struct PairCounts {
  std::vector<PairGroup> groups;
  std::int64_t total() const;
  ChannelCounts first() const;
  ChannelCounts second() const;
};

// Groups samples by their recorded threshold; group order follows the
// first appearance in time, so results are deterministic.
ChannelCounts channel_counts(const OneBitBatch& batch, int channel);
PairCounts pair_counts(const OneBitBatch& batch, int first, int second);

// Per-sample quantities of the pairwise likelihood for one threshold pair
// and one observed sign pattern (x1, x2).
struct LikelihoodTerms {
  double w1 = 0.0, w2 = 0.0;   // v_i / sigma_i
  double z1 = 0.0, z2 = 0.0;   // x_i w_i
  double p1 = 0.0, p2 = 0.0;   // Pr{x_i = +1}
  double p12 = 0.0;            // Pr{x = (+1, +1)}
  double o = 0.0;              // Pr{x = (x1, x2)}
  double q1 = 0.0, q2 = 0.0;   // (x_i - 1)/2 + p_i, the signed marginal likelihood
  double delta1_1 = 0.0, delta1_2 = 0.0;  // d p_i / d sigma_i
  double delta2_1 = 0.0, delta2_2 = 0.0;  // d^2 p_i / d sigma_i^2
  double u = 0.0;              // w1^2 + w2^2 - 2 rho w1 w2
  double delta1_cross = 0.0;   // d o / d sigma12 = x1 x2 f(w1, w2 | rho) / (sigma1 sigma2)
  double delta2_cross = 0.0;   // d^2 o / d sigma12^2
  Eigen::Vector3d score = Eigen::Vector3d::Zero();  // d log o / d theta
};

LikelihoodTerms likelihood_terms(const PairParams& params, double v1, double v2, int x1,
                                 int x2);

// Log-likelihood of one channel in sigma and its first two derivatives.
struct ScalarDerivs {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

ScalarDerivs channel_loglik(const ChannelCounts& counts, double sigma);

// Pairwise log-likelihood in sigma12 with sigma1, sigma2 held fixed.
ScalarDerivs pair_loglik_sigma12(const PairCounts& counts, double sigma1, double sigma2,
                                 double sigma12);

// Full pairwise log-likelihood and its gradient in theta. The value is
// -infinity when an observed pattern has probability zero under params.
struct PairLoglik {
  double value = 0.0;
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
};

PairLoglik pair_loglik(const PairCounts& counts, const PairParams& params,
                       bool with_gradient = true);

}  // namespace onebit
