#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "onebit/quantizer.hpp"
#include "onebit/recovery.hpp"
#include "onebit/schedule.hpp"

namespace onebit {

// Derivatives of h(a) = v / Q^{-1}(a) at a = p = Q(v / sigma).
struct TaylorCoeffs {
  double p = 0.0;
  double h_prime = 0.0;
  double h_double_prime = 0.0;
};

TaylorCoeffs taylor_coeffs(double sigma, double v);

// Moments E[p_hat^k], k = 1..4, of p_hat = (Binomial(N, p)) / N.
struct MomentSet {
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
};

// Stirling number of the second kind S(c, k) by its explicit sum.
double stirling2(int c, int k);
// E[theta^c] for theta ~ Binomial(N, p) as sum_k S(c, k) N^(k falling) p^k.
double binomial_raw_moment(double p, std::int64_t n, int c);
MomentSet binomial_moments(double p, std::int64_t n);

enum class TaylorMode {
  kFull,        // second-order expansion, including V(p^2) and C(p, p^2)
  kFirstOrder,  // h'^2 V(p_hat) only
};

// Approximate variance of sigma_hat = v / Q^{-1}(p_hat).
// Throws UnidentifiableError for v = 0.
double taylor_var_sigma(double sigma, double v, std::int64_t n,
                        TaylorMode mode = TaylorMode::kFull);

// v minimizing taylor_var_sigma over [v_lo, v_hi] (Brent).
double taylor_optimal_threshold(double sigma, std::int64_t n, double v_lo, double v_hi,
                                TaylorMode mode = TaylorMode::kFull);

enum class TheorySource { kTaylor, kFim };
std::string to_string(TheorySource source);

struct TheoryReport {
  TheorySource source = TheorySource::kTaylor;
  Method method = Method::kConstant;
  std::int64_t samples = 0;
  double mse_sigma1 = 0.0;
  double mse_sigma2 = 0.0;
  double mse_sigma12 = 0.0;
  // Taylor path
  Eigen::RowVector3d l_vector = Eigen::RowVector3d::Zero();
  Eigen::Matrix3d r_matrix = Eigen::Matrix3d::Zero();
  // FIM path
  Eigen::Matrix3d fim = Eigen::Matrix3d::Zero();
  double fim_condition = 0.0;
  bool rank_deficient = false;
  // Dither path: parameters of the shifted covariance actually estimated.
  bool shifted = false;
  PairParams effective_params;
};

// First-order variance of the constant-threshold sigma12 estimator,
// l R l^T; sigma1 and sigma2 entries use taylor_var_sigma.
TheoryReport taylor_var_sigma12(const PairParams& params, double v1, double v2,
                                std::int64_t n, TaylorMode mode = TaylorMode::kFull);

// Fisher information of theta = [sigma1, sigma2, sigma12] for channels
// (first, second) of a recorded schedule, summed over samples.
Eigen::Matrix3d fim(const PairParams& params, const ThresholdSchedule& schedule,
                    int first = 0, int second = 1);

// Fisher information of a single sample with thresholds (v1, v2).
Eigen::Matrix3d fim_sample(const PairParams& params, double v1, double v2);

// Reports diag(F^{-1}), or flags rank deficiency when F is singular or its
// condition number exceeds 1e12.
TheoryReport fim_report(const PairParams& params, const ThresholdSchedule& schedule,
                        int first = 0, int second = 1);

// Dispatch: constant -> Taylor, dither -> Taylor on Sigma + diag(s^2) with a
// delta-method factor for sigma_i, time-varying -> FIM.
TheoryReport predict_mse(const PairParams& params, const ThresholdSchedule& schedule,
                         Method method, TaylorMode mode = TaylorMode::kFull);

}  // namespace onebit
