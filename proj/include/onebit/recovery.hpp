#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "onebit/likelihood.hpp"
#include "onebit/quantizer.hpp"

namespace onebit {

enum class Method {
  kArcsine,           // zero threshold, correlation matrix only
  kConstant,          // one threshold per channel, closed-form inversion
  kDither,            // constant estimator on the dither-shifted covariance
  kTimeVarying,       // per-channel Newton, then cross-term Newton
  kTimeVaryingJoint,  // time-varying followed by joint gradient refinement
};

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct NewtonOptions {
  int max_iter = 50;
  // Converged when |dL/dparam| <= grad_tol * N.
  double grad_tol = 1e-8;
  // Full Newton steps that leave the feasible region before the sigma12
  // stage switches to bisection on its score.
  int max_region_exits = 3;
};

enum class LearningRate {
  kBacktracking,     // mu starts at 1/N every iteration, halves until Armijo holds
  kBarzilaiBorwein,  // BB1 trial step, then the same Armijo backtracking
};

struct JointOptions {
  int max_iter = 5000;
  // Converged when ||grad||_inf <= grad_tol * N.
  double grad_tol = 1e-7;
  LearningRate learning_rate = LearningRate::kBacktracking;
  double armijo = 1e-4;
  int max_halvings = 60;
};

struct NewtonResult {
  double estimate = 0.0;
  int iterations = 0;
  bool converged = false;
  bool used_bisection = false;
};

struct PairEstimate {
  PairParams params;
  std::array<int, 3> iterations{};    // sigma1, sigma2, sigma12 (or joint) stages
  std::array<bool, 3> converged{};
  Method method = Method::kTimeVarying;
  bool used_bisection = false;        // sigma12 Newton fell back to bisection
  bool used_series_fallback = false;  // const_rho fell back to orthant inversion
  bool line_search_failed = false;    // joint refinement returned its start
  int joint_iterations = 0;
  Eigen::Vector3d initial_gradient = Eigen::Vector3d::Zero();  // joint stage, at start
  Eigen::Vector3d final_gradient = Eigen::Vector3d::Zero();
};

// ---- zero threshold -------------------------------------------------------

// sin(pi/2 * sample covariance of the signs); unit diagonal.
Eigen::MatrixXd arcsine_real(const OneBitBatch& batch);
// sin(pi/4 Re S) + i sin(pi/4 Im S) with S the complex sample covariance.
Eigen::MatrixXcd arcsine_complex(const OneBitBatch& batch);

// ---- constant threshold ---------------------------------------------------

// sigma = v / Q^{-1}(p_hat). Throws SaturationError for p_hat in {0, 1},
// IllPosedError within 1e-6 of 1/2 or when the estimate would be
// non-positive, UnidentifiableError for v = 0.
double const_sigma(double p_hat, double v);
double const_sigma(const OneBitBatch& batch, int channel, double v);

// Truncated orthant series in rho:
//   p12(rho) = Q(h1) Q(h2) + exp(-(h1^2 + h2^2)/2)/pi
//              * sum_{k=0..order} H_k(h1/sqrt2) H_k(h2/sqrt2) rho^{k+1} / (2^{k+1} (k+1)!)
// with h_i = v_i / sigma_i. Returns coefficients c[0..order+1] of rho^j.
std::vector<double> orthant_series_coefficients(double h1, double h2, int order);

struct ConstRhoResult {
  double rho = 0.0;
  bool used_fallback = false;
};

// Solves p12(rho) = p12_hat on the truncated series, choosing the real root
// in (-1, 1) nearest `rho_init`; bisection on bvn_orthant when there is none.
ConstRhoResult const_rho(double p12_hat, double v1, double v2, double sigma1_hat,
                         double sigma2_hat, int order = 20, double rho_init = 0.0);

// ---- time-varying threshold -----------------------------------------------

// Closed-form start: const_sigma on the sub-interval whose p_hat is nearest
// 0.3 (mirrored to 0.7 for negative thresholds).
double initial_sigma(const ChannelCounts& counts);
NewtonResult mle_sigma_newton(const ChannelCounts& counts, double init,
                              const NewtonOptions& options = {});

// Arcsine estimate on the smallest-|threshold| sub-interval, scaled by
// sigma1_hat * sigma2_hat.
double initial_sigma12(const PairCounts& counts, double sigma1_hat, double sigma2_hat);
NewtonResult mle_sigma12_newton(const PairCounts& counts, double sigma1_hat,
                                double sigma2_hat, double init,
                                const NewtonOptions& options = {});

// Gradient ascent on the full pairwise likelihood from `init`.
PairEstimate joint_mle(const PairCounts& counts, const PairParams& init,
                       const JointOptions& options = {});

// ---- pair and matrix pipelines --------------------------------------------

struct RecoveryOptions {
  Method method = Method::kTimeVarying;
  bool psd_projection = false;
  int series_order = 20;
  NewtonOptions newton;
  JointOptions joint;
};

// Full estimator for channels (first, second) of a real batch.
PairEstimate estimate_pair(const OneBitBatch& batch, int first, int second,
                           const RecoveryOptions& options = {});

struct MatrixEstimate {
  Eigen::MatrixXd covariance;
  Method method = Method::kTimeVarying;
  bool psd_projected = false;  // projection requested and applied
  bool psd_clipped = false;    // projection changed at least one eigenvalue
  std::vector<NewtonResult> channels;
  std::vector<std::array<int, 2>> pair_index;
  std::vector<PairEstimate> pairs;
};

// Pairwise assembly for M >= 2 channels.
MatrixEstimate recover_matrix(const OneBitBatch& batch, const RecoveryOptions& options = {});

struct ComplexMatrixEstimate {
  Eigen::MatrixXcd covariance;
  Method method = Method::kTimeVarying;
  bool hermitian_enforced = false;
  bool psd_projected = false;
  bool psd_clipped = false;
  MatrixEstimate widely_linear;  // 2M x 2M real estimate (empty for arcsine)
};

// Widely linear recovery of a complex batch:
//   Sigma = S_ww + S_zz + i (S_zw - S_wz).
ComplexMatrixEstimate recover_complex(const OneBitBatch& batch,
                                      const RecoveryOptions& options = {});

// Eigenvalue clipping at zero. Returns true when anything was clipped.
bool project_psd(Eigen::MatrixXd& matrix);
bool project_psd(Eigen::MatrixXcd& matrix);

}  // namespace onebit
