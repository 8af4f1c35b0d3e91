#include "onebit/theory.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include <boost/math/tools/minima.hpp>

#include "onebit/error.hpp"
#include "onebit/gauss.hpp"
#include "onebit/likelihood.hpp"

namespace onebit {

namespace {

constexpr double kMaxCondition = 1e12;

void require_samples(std::int64_t n) {
  if (n < 1) throw UsageError("theory: sample count must be positive");
}

}  // namespace

TaylorCoeffs taylor_coeffs(double sigma, double v) {
  if (v == 0.0) throw UnidentifiableError("taylor: zero threshold, variance is infinite");
  if (!(sigma > 0.0)) throw UsageError("taylor: sigma must be positive");
  const double a2 = v * v / (sigma * sigma);
  TaylorCoeffs c;
  c.p = q(v / sigma);
  c.h_prime = kSqrt2Pi * sigma * sigma / v * std::exp(a2 / 2.0);
  c.h_double_prime =
      std::exp(a2) * (4.0 * kPi * sigma * sigma * sigma / (v * v) - 2.0 * kPi * sigma);
  return c;
}

double stirling2(int c, int k) {
  if (c == 0 && k == 0) return 1.0;
  if (k == 0 || k > c) return 0.0;
  double sum = 0.0;
  double fact_j1 = 1.0;  // (j-1)!
  for (int j = 1; j <= k; ++j) {
    if (j > 1) fact_j1 *= (j - 1);
    double fact_kj = 1.0;
    for (int m = 2; m <= k - j; ++m) fact_kj *= m;
    const double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
    sum += sign * std::pow(j, c - 1) / (fact_j1 * fact_kj);
  }
  return std::round(sum);
}

double binomial_raw_moment(double p, std::int64_t n, int c) {
  if (c < 0) throw UsageError("binomial moment: negative order");
  double sum = 0.0;
  double falling = 1.0;
  for (int k = 0; k <= c; ++k) {
    if (k > 0) falling *= static_cast<double>(n - (k - 1));
    sum += stirling2(c, k) * falling * std::pow(p, k);
  }
  return sum;
}

MomentSet binomial_moments(double p, std::int64_t n) {
  require_samples(n);
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("binomial moments: p outside [0, 1]");
  const auto nd = static_cast<double>(n);
  MomentSet m;
  m.m1 = binomial_raw_moment(p, n, 1) / nd;
  m.m2 = binomial_raw_moment(p, n, 2) / (nd * nd);
  m.m3 = binomial_raw_moment(p, n, 3) / (nd * nd * nd);
  m.m4 = binomial_raw_moment(p, n, 4) / (nd * nd * nd * nd);
  return m;
}

double taylor_var_sigma(double sigma, double v, std::int64_t n, TaylorMode mode) {
  require_samples(n);
  const TaylorCoeffs c = taylor_coeffs(sigma, v);
  const MomentSet m = binomial_moments(c.p, n);
  const double var_p = m.m2 - c.p * c.p;
  if (mode == TaylorMode::kFirstOrder) return c.h_prime * c.h_prime * var_p;
  const double var_p2 = m.m4 - m.m2 * m.m2;
  const double cov = m.m3 - c.p * m.m2;
  const double a = c.h_prime - c.h_double_prime * c.p;
  const double b = c.h_double_prime;
  return a * a * var_p + 0.25 * b * b * var_p2 + a * b * cov;
}

double taylor_optimal_threshold(double sigma, std::int64_t n, double v_lo, double v_hi,
                                TaylorMode mode) {
  if (!(v_lo > 0.0) || !(v_hi > v_lo)) {
    throw UsageError("taylor_optimal_threshold: need 0 < v_lo < v_hi");
  }
  const auto r = boost::math::tools::brent_find_minima(
      [&](double v) { return taylor_var_sigma(sigma, v, n, mode); }, v_lo, v_hi,
      std::numeric_limits<double>::digits / 2);
  return r.first;
}

std::string to_string(TheorySource source) {
  return source == TheorySource::kTaylor ? "taylor" : "fim";
}

TheoryReport taylor_var_sigma12(const PairParams& params, double v1, double v2,
                                std::int64_t n, TaylorMode mode) {
  params.validate();
  require_samples(n);
  const double s1 = params.sigma1;
  const double s2 = params.sigma2;
  const double rho = params.rho();
  const TaylorCoeffs c1 = taylor_coeffs(s1, v1);
  const TaylorCoeffs c2 = taylor_coeffs(s2, v2);
  const double w1 = v1 / s1;
  const double w2 = v2 / s2;
  const double p1 = c1.p;
  const double p2 = c2.p;
  const double p12 = bvn_orthant(w1, w2, rho);

  const double dp12_ds12 = bvn_pdf(w1, w2, rho) / (s1 * s2);
  const double dp12_ds1 = g_fn(w1, w2, rho) / s1;
  const double dp12_ds2 = g_fn(w2, w1, rho) / s2;
  const double ds12_dp12 = 1.0 / dp12_ds12;

  TheoryReport out;
  out.source = TheorySource::kTaylor;
  out.method = Method::kConstant;
  out.samples = n;
  out.effective_params = params;
  out.l_vector << -ds12_dp12 * dp12_ds1 * c1.h_prime, -ds12_dp12 * dp12_ds2 * c2.h_prime,
      ds12_dp12;
  const auto nd = static_cast<double>(n);
  out.r_matrix << p1 * (1.0 - p1), p12 - p1 * p2, p12 * (1.0 - p1),  //
      p12 - p1 * p2, p2 * (1.0 - p2), p12 * (1.0 - p2),              //
      p12 * (1.0 - p1), p12 * (1.0 - p2), p12 * (1.0 - p12);
  out.r_matrix /= nd;
  out.mse_sigma12 = out.l_vector * out.r_matrix * out.l_vector.transpose();
  out.mse_sigma1 = taylor_var_sigma(s1, v1, n, mode);
  out.mse_sigma2 = taylor_var_sigma(s2, v2, n, mode);
  return out;
}

Eigen::Matrix3d fim_sample(const PairParams& params, double v1, double v2) {
  Eigen::Matrix3d f = Eigen::Matrix3d::Zero();
  const double s1 = params.sigma1;
  const double s2 = params.sigma2;
  const double rho = params.rho();
  const double w1 = v1 / s1;
  const double w2 = v2 / s2;
  const double dens = bvn_pdf(w1, w2, rho);
  for (const auto& x : kOutcomes) {
    const double z1 = x[0] * w1;
    const double z2 = x[1] * w2;
    const double re = x[0] * x[1] * rho;
    const double o = bvn_orthant(z1, z2, re);
    if (!(o > 0.0)) continue;
    // Scores of o rather than log o; divide once by o.
    Eigen::Vector3d d;
    d << g_fn(z1, z2, re) / s1, g_fn(z2, z1, re) / s2, x[0] * x[1] * dens / (s1 * s2);
    f += d * d.transpose() / o;
  }
  return f;
}

Eigen::Matrix3d fim(const PairParams& params, const ThresholdSchedule& schedule, int first,
                    int second) {
  params.validate();
  if (schedule.is_random()) {
    throw UsageError("fim: dither thresholds are not recorded; use predict_mse");
  }
  if (first < 0 || second < 0 || first >= schedule.channels() ||
      second >= schedule.channels()) {
    throw UsageError("fim: channel out of range");
  }
  std::map<std::pair<double, double>, std::int64_t> groups;
  for (std::int64_t t = 0; t < schedule.samples(); ++t) {
    ++groups[{schedule.nominal(first, t), schedule.nominal(second, t)}];
  }
  Eigen::Matrix3d f = Eigen::Matrix3d::Zero();
  for (const auto& [v, count] : groups) {
    f += static_cast<double>(count) * fim_sample(params, v.first, v.second);
  }
  return 0.5 * (f + f.transpose());
}

TheoryReport fim_report(const PairParams& params, const ThresholdSchedule& schedule,
                        int first, int second) {
  TheoryReport out;
  out.source = TheorySource::kFim;
  out.method = Method::kTimeVarying;
  out.samples = schedule.samples();
  out.effective_params = params;
  out.fim = fim(params, schedule, first, second);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(out.fim);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  out.fim_condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(hi > 0.0) || !(out.fim_condition <= kMaxCondition)) {
    out.rank_deficient = true;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.mse_sigma1 = out.mse_sigma2 = out.mse_sigma12 = nan;
    return out;
  }
  const Eigen::Matrix3d inv = out.fim.ldlt().solve(Eigen::Matrix3d::Identity());
  out.mse_sigma1 = inv(0, 0);
  out.mse_sigma2 = inv(1, 1);
  out.mse_sigma12 = inv(2, 2);
  return out;
}

TheoryReport predict_mse(const PairParams& params, const ThresholdSchedule& schedule,
                         Method method, TaylorMode mode) {
  params.validate();
  if (schedule.channels() < 2) throw UsageError("predict_mse: schedule needs two channels");
  switch (method) {
    case Method::kArcsine:
      throw UsageError("predict_mse: no theory path for the arcsine estimator");
    case Method::kConstant: {
      if (schedule.kind() != ScheduleKind::kConstant) {
        throw UsageError("predict_mse: constant method needs a constant schedule");
      }
      return taylor_var_sigma12(params, schedule.nominal(0, 0), schedule.nominal(1, 0),
                                schedule.samples(), mode);
    }
    case Method::kDither: {
      if (!schedule.is_random()) {
        throw UsageError("predict_mse: dither method needs a gaussian_dither schedule");
      }
      const double d1 = schedule.dither_stddev()[0];
      const double d2 = schedule.dither_stddev()[1];
      PairParams shifted{std::sqrt(params.sigma1 * params.sigma1 + d1 * d1),
                         std::sqrt(params.sigma2 * params.sigma2 + d2 * d2), params.sigma12};
      TheoryReport r = taylor_var_sigma12(shifted, schedule.nominal(0, 0),
                                          schedule.nominal(1, 0), schedule.samples(), mode);
      // sigma_i = sqrt(sigma_i'^2 - s_i^2): d sigma_i / d sigma_i' = sigma_i' / sigma_i.
      const double k1 = shifted.sigma1 / params.sigma1;
      const double k2 = shifted.sigma2 / params.sigma2;
      r.mse_sigma1 *= k1 * k1;
      r.mse_sigma2 *= k2 * k2;
      r.method = Method::kDither;
      r.shifted = true;
      r.effective_params = shifted;
      return r;
    }
    case Method::kTimeVarying:
    case Method::kTimeVaryingJoint: {
      TheoryReport r = fim_report(params, schedule);
      r.method = method;
      return r;
    }
  }
  throw UsageError("predict_mse: unknown method");
}

}  // namespace onebit
