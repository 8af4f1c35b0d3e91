#include "onebit/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <unsupported/Eigen/Polynomials>

#include "onebit/error.hpp"
#include "onebit/gauss.hpp"

namespace onebit {

namespace {

constexpr double kRhoClamp = 1.0 - 1e-9;
constexpr double kSaturationGuard = 1e-6;

// Accept a step when the likelihood does not drop beyond round-off.
bool not_worse(double candidate, double current) {
  return std::isfinite(candidate) &&
         candidate >= current - 1e-12 * std::max(1.0, std::abs(current));
}

double sign_correlation(const std::array<std::int64_t, 4>& n) {
  const auto total = static_cast<double>(n[0] + n[1] + n[2] + n[3]);
  return static_cast<double>(n[0] + n[3] - n[1] - n[2]) / total;
}

template <typename Fn>
auto with_channel_context(int channel, Fn&& fn) -> decltype(fn()) {
  const std::string prefix = "channel " + std::to_string(channel) + ": ";
  try {
    return fn();
  } catch (const UnidentifiableError& e) {
    throw UnidentifiableError(prefix + e.what());
  } catch (const SaturationError& e) {
    throw SaturationError(prefix + e.what());
  } catch (const IllPosedError& e) {
    throw IllPosedError(prefix + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(prefix + e.what(), e.last_iterate());
  }
}

// Single threshold per channel, required by the closed-form estimators.
const PairGroup& single_group(const PairCounts& counts, const char* who) {
  if (counts.groups.size() != 1) {
    throw UsageError(std::string(who) +
                     ": needs one constant threshold per channel, found " +
                     std::to_string(counts.groups.size()) + " threshold groups");
  }
  return counts.groups.front();
}

struct ConstantPair {
  double sigma1;
  double sigma2;
  double sigma12;
  bool fallback;
};

ConstantPair constant_pair(const PairGroup& g, int order) {
  const auto n = static_cast<double>(g.total());
  const double p1 = static_cast<double>(g.n[0] + g.n[1]) / n;
  const double p2 = static_cast<double>(g.n[0] + g.n[2]) / n;
  const double p12 = static_cast<double>(g.n[0]) / n;
  const double s1 = const_sigma(p1, g.v1);
  const double s2 = const_sigma(p2, g.v2);
  const double init = std::sin(kPi / 2.0 * sign_correlation(g.n));
  const ConstRhoResult r = const_rho(p12, g.v1, g.v2, s1, s2, order, init);
  return {s1, s2, r.rho * s1 * s2, r.used_fallback};
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kArcsine: return "arcsine";
    case Method::kConstant: return "constant";
    case Method::kDither: return "dither";
    case Method::kTimeVarying: return "time_varying";
    case Method::kTimeVaryingJoint: return "time_varying_joint";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "arcsine") return Method::kArcsine;
  if (name == "constant") return Method::kConstant;
  if (name == "dither" || name == "random") return Method::kDither;
  if (name == "time_varying") return Method::kTimeVarying;
  if (name == "time_varying_joint" || name == "joint") return Method::kTimeVaryingJoint;
  throw UsageError("unknown method '" + name + "'");
}

// ---- zero threshold -------------------------------------------------------

Eigen::MatrixXd arcsine_real(const OneBitBatch& batch) {
  batch.validate();
  if (batch.is_complex()) throw UsageError("arcsine_real: batch is complex");
  if (!batch.schedule.is_zero()) {
    throw UsageError("arcsine_real: requires a zero-threshold batch");
  }
  const int m = batch.channels;
  const std::int64_t n = batch.samples;
  Eigen::MatrixXd x(m, n);
  for (int i = 0; i < m; ++i) {
    for (std::int64_t t = 0; t < n; ++t) x(i, t) = batch.sign(i, t);
  }
  const Eigen::MatrixXd s = x * x.transpose() / static_cast<double>(n);
  return (kPi / 2.0 * s.array()).sin().matrix();
}

Eigen::MatrixXcd arcsine_complex(const OneBitBatch& batch) {
  batch.validate();
  if (!batch.is_complex()) throw UsageError("arcsine_complex: batch is real");
  if (!batch.schedule.is_zero()) {
    throw UsageError("arcsine_complex: requires a zero-threshold batch");
  }
  const int m = batch.channels;
  const std::int64_t n = batch.samples;
  Eigen::MatrixXcd x(m, n);
  for (int i = 0; i < m; ++i) {
    for (std::int64_t t = 0; t < n; ++t) x(i, t) = {double(batch.sign(i, t)), double(batch.sign_im(i, t))};
  }
  const Eigen::MatrixXcd s = x * x.adjoint() / static_cast<double>(n);
  Eigen::MatrixXcd out(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      out(i, j) = {std::sin(kPi / 4.0 * s(i, j).real()), std::sin(kPi / 4.0 * s(i, j).imag())};
    }
  }
  return out;
}

// ---- constant threshold ---------------------------------------------------

double const_sigma(double p_hat, double v) {
  if (v == 0.0) throw UnidentifiableError("const_sigma: zero threshold carries no scale");
  if (!(p_hat > 0.0 && p_hat < 1.0)) {
    throw SaturationError("const_sigma: saturated proportion p_hat=" + std::to_string(p_hat));
  }
  if (std::abs(p_hat - 0.5) < kSaturationGuard) {
    throw IllPosedError("const_sigma: p_hat within 1e-6 of 1/2 (sigma -> infinity)");
  }
  const double a = q_inv(p_hat);
  const double sigma = v / a;
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw IllPosedError("const_sigma: p_hat=" + std::to_string(p_hat) +
                        " is on the wrong side of 1/2 for v=" + std::to_string(v));
  }
  return sigma;
}

double const_sigma(const OneBitBatch& batch, int channel, double v) {
  const ChannelCounts c = channel_counts(batch, channel);
  std::int64_t plus = 0;
  for (const auto& g : c.groups) plus += g.n_plus;
  return const_sigma(static_cast<double>(plus) / static_cast<double>(c.total()), v);
}

std::vector<double> orthant_series_coefficients(double h1, double h2, int order) {
  if (order < 1) throw UsageError("orthant series: order must be >= 1");
  std::vector<double> c(static_cast<std::size_t>(order) + 2, 0.0);
  c[0] = q(h1) * q(h2);
  const double prefactor = std::exp(-(h1 * h1 + h2 * h2) / 2.0) / kPi;
  const double a1 = h1 / std::sqrt(2.0);
  const double a2 = h2 / std::sqrt(2.0);
  // 2^{k+1} (k+1)! accumulated in log space keeps order 20+ finite.
  double log_denominator = 0.0;
  for (int k = 0; k <= order; ++k) {
    log_denominator += std::log(2.0 * (k + 1));
    c[static_cast<std::size_t>(k) + 1] =
        prefactor * hermite(k, a1) * hermite(k, a2) * std::exp(-log_denominator);
  }
  return c;
}

ConstRhoResult const_rho(double p12_hat, double v1, double v2, double sigma1_hat,
                         double sigma2_hat, int order, double rho_init) {
  if (!(sigma1_hat > 0.0) || !(sigma2_hat > 0.0)) {
    throw UsageError("const_rho: sigma estimates must be positive");
  }
  const double h1 = v1 / sigma1_hat;
  const double h2 = v2 / sigma2_hat;
  std::vector<double> c = orthant_series_coefficients(h1, h2, order);
  c[0] -= p12_hat;

  double scale = 0.0;
  for (double x : c) scale = std::max(scale, std::abs(x));
  std::size_t degree = c.size() - 1;
  while (degree > 0 && std::abs(c[degree]) <= 1e-14 * scale) --degree;

  ConstRhoResult out;
  bool found = false;
  if (degree >= 1) {
    Eigen::VectorXd poly(static_cast<Eigen::Index>(degree) + 1);
    for (std::size_t k = 0; k <= degree; ++k) poly[static_cast<Eigen::Index>(k)] = c[k];
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
    solver.compute(poly);
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < solver.roots().size(); ++k) {
      const auto z = solver.roots()[k];
      if (std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z))) continue;
      if (!(std::abs(z.real()) < 1.0)) continue;
      const double dist = std::abs(z.real() - rho_init);
      if (dist < best) {
        best = dist;
        out.rho = z.real();
        found = true;
      }
    }
  }
  if (found) {
    out.rho = std::clamp(out.rho, -kRhoClamp, kRhoClamp);
    return out;
  }

  // p12 is increasing in rho (its derivative is the density), so bisection
  // on the exact orthant probability always has a unique answer.
  out.used_fallback = true;
  double lo = -kRhoClamp;
  double hi = kRhoClamp;
  if (bvn_orthant(h1, h2, lo) >= p12_hat) {
    out.rho = lo;
    return out;
  }
  if (bvn_orthant(h1, h2, hi) <= p12_hat) {
    out.rho = hi;
    return out;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bvn_orthant(h1, h2, mid) < p12_hat) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.rho = 0.5 * (lo + hi);
  return out;
}

// ---- time-varying threshold -----------------------------------------------

double initial_sigma(const ChannelCounts& counts) {
  bool any_nonzero = false;
  bool any_unsaturated = false;
  double best = std::numeric_limits<double>::infinity();
  double sigma0 = 0.0;
  double mean_abs_v = 0.0;
  int nonzero = 0;
  for (const auto& g : counts.groups) {
    if (g.v == 0.0 || g.total() == 0) continue;
    any_nonzero = true;
    mean_abs_v += std::abs(g.v);
    ++nonzero;
    if (g.n_plus == 0 || g.n_minus == 0) continue;
    any_unsaturated = true;
    const double p = static_cast<double>(g.n_plus) / static_cast<double>(g.total());
    const double target = g.v > 0.0 ? 0.3 : 0.7;
    try {
      const double s = const_sigma(p, g.v);
      if (std::abs(p - target) < best) {
        best = std::abs(p - target);
        sigma0 = s;
      }
    } catch (const IllPosedError&) {
    }
  }
  if (!any_nonzero) {
    throw UnidentifiableError("all thresholds are zero; the scale is not identifiable");
  }
  if (!any_unsaturated) {
    throw UnidentifiableError("every nonzero-threshold sub-interval is saturated");
  }
  if (sigma0 > 0.0) return sigma0;
  return mean_abs_v / nonzero;
}

NewtonResult mle_sigma_newton(const ChannelCounts& counts, double init,
                              const NewtonOptions& options) {
  if (!(init > 0.0) || !std::isfinite(init)) {
    throw UsageError("mle_sigma_newton: init must be positive");
  }
  bool any_nonzero = false;
  for (const auto& g : counts.groups) any_nonzero |= (g.v != 0.0 && g.total() > 0);
  if (!any_nonzero) {
    throw UnidentifiableError("all thresholds are zero; the scale is not identifiable");
  }
  const double tol = options.grad_tol * static_cast<double>(counts.total());

  NewtonResult out;
  double sigma = init;
  ScalarDerivs ev = channel_loglik(counts, sigma);
  for (int it = 0; it <= options.max_iter; ++it) {
    out.iterations = it;
    if (std::abs(ev.d1) <= tol) {
      out.estimate = sigma;
      out.converged = true;
      return out;
    }
    if (it == options.max_iter) break;
    // Ascent fallback when the curvature is not negative.
    const double delta = ev.d2 < 0.0 ? -ev.d1 / ev.d2 : std::copysign(0.5 * sigma, ev.d1);
    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h, step *= 0.5) {
      const double cand = sigma + step * delta;
      if (!(cand > 0.0)) continue;
      const ScalarDerivs ce = channel_loglik(counts, cand);
      if (not_worse(ce.value, ev.value)) {
        sigma = cand;
        ev = ce;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  throw ConvergenceError("mle_sigma_newton: no convergence after " +
                             std::to_string(out.iterations) + " iterations",
                         sigma);
}

double initial_sigma12(const PairCounts& counts, double sigma1_hat, double sigma2_hat) {
  const PairGroup* best = nullptr;
  for (const auto& g : counts.groups) {
    if (g.total() == 0) continue;
    if (best == nullptr ||
        std::abs(g.v1) + std::abs(g.v2) < std::abs(best->v1) + std::abs(best->v2)) {
      best = &g;
    }
  }
  if (best == nullptr) throw UsageError("initial_sigma12: no samples");
  const double rho = std::clamp(std::sin(kPi / 2.0 * sign_correlation(best->n)), -0.99, 0.99);
  return rho * sigma1_hat * sigma2_hat;
}

NewtonResult mle_sigma12_newton(const PairCounts& counts, double sigma1_hat,
                                double sigma2_hat, double init,
                                const NewtonOptions& options) {
  if (!(sigma1_hat > 0.0) || !(sigma2_hat > 0.0)) {
    throw UsageError("mle_sigma12_newton: sigma estimates must be positive");
  }
  const double bound = kRhoClamp * sigma1_hat * sigma2_hat;
  const double tol = options.grad_tol * static_cast<double>(counts.total());
  auto eval = [&](double s12) {
    return pair_loglik_sigma12(counts, sigma1_hat, sigma2_hat, s12);
  };

  NewtonResult out;
  double x = std::clamp(init, -bound, bound);
  ScalarDerivs ev = eval(x);
  int exits = 0;
  for (int it = 0; it <= options.max_iter; ++it) {
    out.iterations = it;
    if (std::isfinite(ev.value) && std::abs(ev.d1) <= tol) {
      out.estimate = x;
      out.converged = true;
      return out;
    }
    if (it == options.max_iter || exits >= options.max_region_exits) break;
    const double delta = ev.d2 < 0.0 ? -ev.d1 / ev.d2 : std::copysign(0.25 * bound, ev.d1);
    if (std::abs(x + delta) >= bound) ++exits;
    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h, step *= 0.5) {
      const double cand = x + step * delta;
      if (!(std::abs(cand) < bound)) continue;
      const ScalarDerivs ce = eval(cand);
      if (!std::isfinite(ev.value) ? std::isfinite(ce.value) : not_worse(ce.value, ev.value)) {
        x = cand;
        ev = ce;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  // Bisection on the score over the clamped region.
  out.used_bisection = true;
  double lo = -bound;
  double hi = bound;
  const double score_lo = eval(lo).d1;
  const double score_hi = eval(hi).d1;
  if (!(score_lo > 0.0)) {
    out.estimate = lo;
    out.converged = true;
    return out;
  }
  if (!(score_hi < 0.0)) {
    out.estimate = hi;
    out.converged = true;
    return out;
  }
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = eval(mid).d1;
    out.iterations += 1;
    if (std::abs(s) <= tol || hi - lo <= 1e-15 * bound) {
      out.estimate = mid;
      out.converged = true;
      return out;
    }
    if (s > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw ConvergenceError("mle_sigma12_newton: bisection did not converge", 0.5 * (lo + hi));
}

PairEstimate joint_mle(const PairCounts& counts, const PairParams& init,
                       const JointOptions& options) {
  init.validate();
  const double n = static_cast<double>(counts.total());
  const double tol = options.grad_tol * n;

  PairEstimate out;
  out.method = Method::kTimeVaryingJoint;
  out.params = init;

  Eigen::Vector3d theta = init.theta();
  auto eval = [&](const Eigen::Vector3d& th, bool grad) {
    return pair_loglik(counts, {th[0], th[1], th[2]}, grad);
  };
  PairLoglik cur = eval(theta, true);
  if (!std::isfinite(cur.value)) {
    throw NumericalError("joint_mle: starting point has zero likelihood");
  }
  out.initial_gradient = cur.grad;

  Eigen::Vector3d prev_theta = theta;
  Eigen::Vector3d prev_grad = cur.grad;
  double mu = 1.0 / n;
  for (int it = 0; it < options.max_iter; ++it) {
    out.joint_iterations = it;
    if (cur.grad.lpNorm<Eigen::Infinity>() <= tol) {
      out.converged = {true, true, true};
      break;
    }
    if (options.learning_rate == LearningRate::kBarzilaiBorwein && it > 0) {
      const Eigen::Vector3d s = theta - prev_theta;
      const Eigen::Vector3d y = cur.grad - prev_grad;  // ascent: y^T s < 0 near a max
      const double sy = s.dot(y);
      mu = sy < 0.0 ? -s.squaredNorm() / sy : 1.0 / n;
    } else {
      mu = 1.0 / n;
    }
    const double slope = cur.grad.squaredNorm();
    bool accepted = false;
    for (int h = 0; h < options.max_halvings; ++h, mu *= 0.5) {
      const Eigen::Vector3d cand = theta + mu * cur.grad;
      const PairLoglik ce = eval(cand, false);
      if (std::isfinite(ce.value) && ce.value >= cur.value + options.armijo * mu * slope) {
        prev_theta = theta;
        prev_grad = cur.grad;
        theta = cand;
        cur = eval(theta, true);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (it == 0) out.line_search_failed = true;
      out.converged = {false, false, false};
      break;
    }
    out.joint_iterations = it + 1;
  }
  if (out.line_search_failed) {
    theta = init.theta();
    cur = eval(theta, true);
  }
  out.params = {theta[0], theta[1], theta[2]};
  out.final_gradient = cur.grad;
  out.iterations = {out.joint_iterations, out.joint_iterations, out.joint_iterations};
  return out;
}

// ---- pair and matrix pipelines --------------------------------------------

namespace {

NewtonResult channel_sigma(const ChannelCounts& counts, const NewtonOptions& options) {
  return mle_sigma_newton(counts, initial_sigma(counts), options);
}

PairEstimate time_varying_pair(const PairCounts& counts, const NewtonResult& r1,
                               const NewtonResult& r2, const RecoveryOptions& options) {
  PairEstimate out;
  out.method = Method::kTimeVarying;
  const double s1 = r1.estimate;
  const double s2 = r2.estimate;
  const NewtonResult r12 = mle_sigma12_newton(
      counts, s1, s2, initial_sigma12(counts, s1, s2), options.newton);
  out.params = {s1, s2, r12.estimate};
  out.iterations = {r1.iterations, r2.iterations, r12.iterations};
  out.converged = {r1.converged, r2.converged, r12.converged};
  out.used_bisection = r12.used_bisection;
  if (options.method == Method::kTimeVaryingJoint) {
    PairEstimate joint = joint_mle(counts, out.params, options.joint);
    joint.used_bisection = out.used_bisection;
    return joint;
  }
  return out;
}

PairEstimate closed_form_pair(const PairCounts& counts, const ThresholdSchedule& schedule,
                              int first, int second, const RecoveryOptions& options) {
  const PairGroup& g = single_group(counts, to_string(options.method).c_str());
  ConstantPair cp = constant_pair(g, options.series_order);
  PairEstimate out;
  out.method = options.method;
  out.used_series_fallback = cp.fallback;
  out.converged = {true, true, true};
  if (options.method == Method::kDither) {
    if (!schedule.is_random()) throw UsageError("dither method: schedule is not a dither");
    const double d1 = schedule.dither_stddev()[static_cast<std::size_t>(first)];
    const double d2 = schedule.dither_stddev()[static_cast<std::size_t>(second)];
    const double var1 = cp.sigma1 * cp.sigma1 - d1 * d1;
    const double var2 = cp.sigma2 * cp.sigma2 - d2 * d2;
    if (!(var1 > 0.0) || !(var2 > 0.0)) {
      throw IllPosedError("dither method: estimated total variance below dither variance");
    }
    cp.sigma1 = std::sqrt(var1);
    cp.sigma2 = std::sqrt(var2);
  }
  out.params = {cp.sigma1, cp.sigma2, cp.sigma12};
  return out;
}

void require_method_schedule(const ThresholdSchedule& s, Method m) {
  switch (m) {
    case Method::kArcsine:
      if (!s.is_zero()) throw UsageError("arcsine: requires a zero-threshold schedule");
      break;
    case Method::kConstant:
      if (s.is_random()) throw UsageError("constant: dither schedule needs method 'dither'");
      break;
    case Method::kDither:
      if (!s.is_random()) throw UsageError("dither: requires a gaussian_dither schedule");
      break;
    case Method::kTimeVarying:
    case Method::kTimeVaryingJoint:
      if (s.is_random()) {
        throw UsageError("time-varying MLE needs recorded thresholds, not a dither");
      }
      break;
  }
}

}  // namespace

PairEstimate estimate_pair(const OneBitBatch& batch, int first, int second,
                           const RecoveryOptions& options) {
  require_method_schedule(batch.schedule, options.method);
  const PairCounts counts = pair_counts(batch, first, second);
  switch (options.method) {
    case Method::kArcsine: {
      const Eigen::MatrixXd r = arcsine_real(batch.select({first, second}));
      PairEstimate out;
      out.method = Method::kArcsine;
      out.params = {1.0, 1.0, r(0, 1)};
      out.converged = {true, true, true};
      return out;
    }
    case Method::kConstant:
    case Method::kDither:
      return closed_form_pair(counts, batch.schedule, first, second, options);
    case Method::kTimeVarying:
    case Method::kTimeVaryingJoint: {
      const NewtonResult r1 =
          with_channel_context(first, [&] { return channel_sigma(counts.first(), options.newton); });
      const NewtonResult r2 = with_channel_context(
          second, [&] { return channel_sigma(counts.second(), options.newton); });
      return time_varying_pair(counts, r1, r2, options);
    }
  }
  throw UsageError("estimate_pair: unknown method");
}

bool project_psd(Eigen::MatrixXd& matrix) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix);
  Eigen::VectorXd ev = es.eigenvalues();
  const bool clipped = (ev.array() < 0.0).any();
  ev = ev.cwiseMax(0.0);
  matrix = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return clipped;
}

bool project_psd(Eigen::MatrixXcd& matrix) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix);
  Eigen::VectorXd ev = es.eigenvalues();
  const bool clipped = (ev.array() < 0.0).any();
  ev = ev.cwiseMax(0.0);
  matrix = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  return clipped;
}

MatrixEstimate recover_matrix(const OneBitBatch& batch, const RecoveryOptions& options) {
  batch.validate();
  if (batch.is_complex()) throw UsageError("recover_matrix: use recover_complex");
  const int m = batch.channels;
  if (m < 2) throw UsageError("recover_matrix: needs at least two channels");
  require_method_schedule(batch.schedule, options.method);

  MatrixEstimate out;
  out.method = options.method;
  out.covariance = Eigen::MatrixXd::Zero(m, m);

  if (options.method == Method::kArcsine) {
    out.covariance = arcsine_real(batch);
  } else if (options.method == Method::kConstant || options.method == Method::kDither) {
    // Diagonal first so a bad channel is reported by name.
    for (int i = 0; i < m; ++i) {
      const ChannelCounts c = channel_counts(batch, i);
      if (c.groups.size() != 1) {
        throw UsageError(to_string(options.method) +
                         ": needs one constant threshold per channel");
      }
      with_channel_context(i, [&] {
        const double p = static_cast<double>(c.groups[0].n_plus) /
                         static_cast<double>(c.groups[0].total());
        return const_sigma(p, c.groups[0].v);
      });
    }
    Eigen::VectorXd var_sum = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        const PairCounts counts = pair_counts(batch, i, j);
        PairEstimate pe = closed_form_pair(counts, batch.schedule, i, j, options);
        out.covariance(i, j) = out.covariance(j, i) = pe.params.sigma12;
        var_sum[i] = pe.params.sigma1 * pe.params.sigma1;
        var_sum[j] = pe.params.sigma2 * pe.params.sigma2;
        out.pair_index.push_back({i, j});
        out.pairs.push_back(pe);
      }
    }
    out.covariance.diagonal() = var_sum;
  } else {
    std::vector<ChannelCounts> counts;
    for (int i = 0; i < m; ++i) {
      counts.push_back(channel_counts(batch, i));
      out.channels.push_back(
          with_channel_context(i, [&] { return channel_sigma(counts.back(), options.newton); }));
    }
    Eigen::VectorXd joint_var = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        const PairCounts pc = pair_counts(batch, i, j);
        PairEstimate pe = time_varying_pair(pc, out.channels[static_cast<std::size_t>(i)],
                                            out.channels[static_cast<std::size_t>(j)], options);
        out.covariance(i, j) = out.covariance(j, i) = pe.params.sigma12;
        joint_var[i] += pe.params.sigma1 * pe.params.sigma1;
        joint_var[j] += pe.params.sigma2 * pe.params.sigma2;
        out.pair_index.push_back({i, j});
        out.pairs.push_back(pe);
      }
    }
    for (int i = 0; i < m; ++i) {
      if (options.method == Method::kTimeVaryingJoint) {
        out.covariance(i, i) = joint_var[i] / (m - 1);
      } else {
        const double s = out.channels[static_cast<std::size_t>(i)].estimate;
        out.covariance(i, i) = s * s;
      }
    }
  }

  if (options.psd_projection) {
    out.psd_projected = true;
    out.psd_clipped = project_psd(out.covariance);
  }
  return out;
}

ComplexMatrixEstimate recover_complex(const OneBitBatch& batch,
                                      const RecoveryOptions& options) {
  batch.validate();
  if (!batch.is_complex()) throw UsageError("recover_complex: batch is real-valued");
  ComplexMatrixEstimate out;
  out.method = options.method;
  const int m = batch.channels;

  if (options.method == Method::kArcsine) {
    out.covariance = arcsine_complex(batch);
  } else {
    RecoveryOptions inner = options;
    inner.psd_projection = false;
    out.widely_linear = recover_matrix(batch.widely_linear(), inner);
    const Eigen::MatrixXd& s = out.widely_linear.covariance;
    const Eigen::MatrixXd sww = s.topLeftCorner(m, m);
    const Eigen::MatrixXd szz = s.bottomRightCorner(m, m);
    const Eigen::MatrixXd swz = s.topRightCorner(m, m);
    const Eigen::MatrixXd szw = s.bottomLeftCorner(m, m);
    out.covariance.resize(m, m);
    out.covariance.real() = sww + szz;
    out.covariance.imag() = szw - swz;
  }
  out.covariance = 0.5 * (out.covariance + out.covariance.adjoint()).eval();
  out.hermitian_enforced = true;
  if (options.psd_projection) {
    out.psd_projected = true;
    out.psd_clipped = project_psd(out.covariance);
  }
  return out;
}

}  // namespace onebit
