#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "onebit/schedule.hpp"

namespace onebit {

// theta = [sigma1, sigma2, sigma12] of a 2x2 covariance block.
struct PairParams {
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double sigma12 = 0.0;

  static PairParams from_rho(double sigma1, double sigma2, double rho) {
    return {sigma1, sigma2, rho * sigma1 * sigma2};
  }

  double rho() const { return sigma12 / (sigma1 * sigma2); }
  Eigen::Vector3d theta() const { return {sigma1, sigma2, sigma12}; }
  Eigen::Matrix2d covariance() const;

  // Throws UsageError unless sigma_i > 0 and |sigma12| < sigma1 sigma2.
  void validate() const;
};

// N sign observations per channel plus the schedule that produced them.
// Complex batches carry a second sign plane for the imaginary parts.
struct OneBitBatch {
  int channels = 0;
  std::int64_t samples = 0;
  std::vector<std::int8_t> re;  // channel-major: re[i * samples + t]
  std::vector<std::int8_t> im;  // empty for real batches
  ThresholdSchedule schedule = ThresholdSchedule::zero(1, 1);
  std::uint64_t seed = 0;

  bool is_complex() const { return !im.empty(); }
  std::int8_t sign(int channel, std::int64_t t) const {
    return re[static_cast<std::size_t>(channel * samples + t)];
  }
  std::int8_t sign_im(int channel, std::int64_t t) const {
    return im[static_cast<std::size_t>(channel * samples + t)];
  }

  // Real batch of 2M channels [Re; Im] with the schedule stacked to match.
  OneBitBatch widely_linear() const;

  // Real batch restricted to the listed channels.
  OneBitBatch select(const std::vector<int>& channels) const;

  // Throws UsageError when entries are not +-1 or shapes disagree.
  void validate() const;
};

// Zero-mean Gaussian draws, M x N, deterministic in (seed, stream).
// Throws MatrixError when the covariance is not positive definite.
Eigen::MatrixXd sample_gaussian(const Eigen::MatrixXd& covariance, std::int64_t samples,
                                std::uint64_t seed, std::uint64_t stream = 0);
Eigen::MatrixXd sample_gaussian(const PairParams& params, std::int64_t samples,
                                std::uint64_t seed, std::uint64_t stream = 0);

// Circular complex Gaussian with E[y y^H] = covariance.
Eigen::MatrixXcd sample_complex_gaussian(const Eigen::MatrixXcd& covariance,
                                         std::int64_t samples, std::uint64_t seed,
                                         std::uint64_t stream = 0);

// x_i(t) = +1 iff y_i(t) >= v_i(t). A dither schedule draws its random
// thresholds from `dither_seed`; the realization is not kept.
OneBitBatch quantize_real(const Eigen::MatrixXd& y, const ThresholdSchedule& schedule,
                          std::uint64_t dither_seed = 0);

// Real and imaginary parts quantized against the same threshold
// (independent dither draws per part).
OneBitBatch quantize_complex(const Eigen::MatrixXcd& y, const ThresholdSchedule& schedule,
                             std::uint64_t dither_seed = 0);

}  // namespace onebit
