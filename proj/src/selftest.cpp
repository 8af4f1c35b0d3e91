#include "onebit/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "onebit/error.hpp"
#include "onebit/gauss.hpp"
#include "onebit/likelihood.hpp"
#include "onebit/rng.hpp"
#include "onebit/theory.hpp"

namespace onebit {

namespace {

struct Point {
  PairParams params;
  double v1, v2;
  int x1, x2;
};

constexpr double kFloor = 1e-4;

Point random_point(Rng& rng) {
  Point p;
  const double s1 = 0.4 + 1.1 * rng.uniform();
  const double s2 = 0.4 + 1.1 * rng.uniform();
  const double rho = -0.85 + 1.7 * rng.uniform();
  p.params = PairParams::from_rho(s1, s2, rho);
  p.v1 = -1.2 + 2.4 * rng.uniform();
  p.v2 = -1.2 + 2.4 * rng.uniform();
  p.x1 = rng.uniform() < 0.5 ? 1 : -1;
  p.x2 = rng.uniform() < 0.5 ? 1 : -1;
  return p;
}

PairCounts single_outcome(const Point& p) {
  PairCounts c;
  PairGroup g{p.v1, p.v2, {}};
  g.n[static_cast<std::size_t>((p.x1 > 0 ? 0 : 2) + (p.x2 > 0 ? 0 : 1))] = 1;
  c.groups.push_back(g);
  return c;
}

double central(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Tracks the worst relative discrepancy |a - b| / max(|b|, floor). The floor
// keeps near-zero derivatives, where central differences lose every digit to
// round-off, from dominating.
struct Worst {
  double value = 0.0;
  std::string where;
  void update(double analytic, double reference, double floor, const std::string& what) {
    const double rel = std::abs(analytic - reference) / std::max(std::abs(reference), floor);
    if (!(rel <= value)) {
      value = std::isnan(rel) ? std::numeric_limits<double>::infinity() : rel;
      where = what;
    }
  }
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

Check finish(const std::string& name, const Worst& w, double tol) {
  Check c;
  c.name = name;
  c.passed = w.value <= tol;
  c.detail = "worst " + fmt(w.value) + " (" + w.where + "), tol " + fmt(tol);
  return c;
}

}  // namespace

double orthant_quadrature(double k1, double k2, double rho) {
  const double r = std::sqrt(1.0 - rho * rho);
  auto f = [&](double x) {
    return phi(x) * 0.5 * std::erfc((k2 - rho * x) / (r * std::sqrt(2.0)));
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, k1, std::numeric_limits<double>::infinity(), 15, 1e-14);
}

Check check_scores(const SelftestOptions& o) {
  Rng rng(o.seed, 1);
  Worst w;
  constexpr double h = 1e-5;
  for (int k = 0; k < o.points; ++k) {
    const Point p = random_point(rng);
    const PairCounts pc = single_outcome(p);
    const double s1 = p.params.sigma1, s2 = p.params.sigma2, s12 = p.params.sigma12;

    // single-channel score in sigma_1
    const ChannelCounts cc = pc.first();
    w.update(channel_loglik(cc, s1).d1,
             central([&](double s) { return channel_loglik(cc, s).value; }, s1, h), kFloor,
             "channel score");
    // sigma12 score with sigma_i fixed
    w.update(pair_loglik_sigma12(pc, s1, s2, s12).d1,
             central([&](double x) { return pair_loglik_sigma12(pc, s1, s2, x).value; }, s12,
                     h),
             kFloor, "sigma12 score");
    // full gradient
    const PairLoglik pl = pair_loglik(pc, p.params, true);
    for (int j = 0; j < 3; ++j) {
      auto f = [&](double x) {
        Eigen::Vector3d th = p.params.theta();
        th[j] = x;
        return pair_loglik(pc, {th[0], th[1], th[2]}, false).value;
      };
      w.update(pl.grad[j], central(f, p.params.theta()[j], h), kFloor,
               "joint gradient " + std::string(kParamNames[static_cast<std::size_t>(j)]));
    }
    // probability derivatives
    const LikelihoodTerms t = likelihood_terms(p.params, p.v1, p.v2, p.x1, p.x2);
    w.update(t.delta1_1, central([&](double s) { return q(p.v1 / s); }, s1, h), kFloor,
             "dp1/dsigma1");
    w.update(t.delta1_cross,
             central(
                 [&](double x) {
                   return bvn_orthant(p.x1 * p.v1 / s1, p.x2 * p.v2 / s2,
                                      p.x1 * p.x2 * x / (s1 * s2));
                 },
                 s12, h),
             kFloor, "do/dsigma12");
  }
  return finish("scores vs central differences", w, 1e-6);
}

Check check_second_derivatives(const SelftestOptions& o) {
  Rng rng(o.seed, 2);
  Worst w;
  constexpr double h = 1e-5;
  for (int k = 0; k < o.points; ++k) {
    const Point p = random_point(rng);
    const PairCounts pc = single_outcome(p);
    const double s1 = p.params.sigma1, s2 = p.params.sigma2, s12 = p.params.sigma12;
    const ChannelCounts cc = pc.first();
    w.update(channel_loglik(cc, s1).d2,
             central([&](double s) { return channel_loglik(cc, s).d1; }, s1, h), kFloor,
             "channel curvature");
    w.update(pair_loglik_sigma12(pc, s1, s2, s12).d2,
             central([&](double x) { return pair_loglik_sigma12(pc, s1, s2, x).d1; }, s12, h),
             kFloor, "sigma12 curvature");
    const LikelihoodTerms t = likelihood_terms(p.params, p.v1, p.v2, p.x1, p.x2);
    w.update(t.delta2_1,
             central(
                 [&](double s) {
                   return likelihood_terms({s, s2, s12 * s / s1}, p.v1, p.v2, p.x1, p.x2)
                       .delta1_1;
                 },
                 s1, h),
             kFloor, "d2p1/dsigma1^2");
    w.update(t.delta2_cross,
             central(
                 [&](double x) {
                   return likelihood_terms({s1, s2, x}, p.v1, p.v2, p.x1, p.x2).delta1_cross;
                 },
                 s12, h),
             kFloor, "d2o/dsigma12^2");
  }
  return finish("second derivatives vs differentiated scores", w, 1e-5);
}

Check check_regularity(const SelftestOptions& o) {
  Rng rng(o.seed, 3);
  double worst = 0.0;
  double worst_sum = 0.0;
  for (int k = 0; k < o.points; ++k) {
    const Point p = random_point(rng);
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    double total = 0.0;
    for (const auto& x : kOutcomes) {
      const LikelihoodTerms t = likelihood_terms(p.params, p.v1, p.v2, x[0], x[1]);
      acc += t.o * t.score;
      total += t.o;
    }
    worst = std::max(worst, acc.lpNorm<Eigen::Infinity>());
    worst_sum = std::max(worst_sum, std::abs(total - 1.0));
  }
  Check c;
  c.name = "regularity: outcome-weighted score is zero";
  c.passed = worst <= 1e-12 && worst_sum <= 1e-12;
  c.detail = "max |sum o*score| " + fmt(worst) + ", max |sum o - 1| " + fmt(worst_sum) +
             ", tol 1e-12";
  return c;
}

Check check_orthant_quadrature(const SelftestOptions& o) {
  Rng rng(o.seed, 4);
  double worst = 0.0;
  for (int k = 0; k < o.points; ++k) {
    const double k1 = -3.0 + 6.0 * rng.uniform();
    const double k2 = -3.0 + 6.0 * rng.uniform();
    const double rho = -0.99 + 1.98 * rng.uniform();
    worst = std::max(worst, std::abs(bvn_orthant(k1, k2, rho) - orthant_quadrature(k1, k2, rho)));
  }
  Check c;
  c.name = "orthant probability vs quadrature";
  c.passed = worst <= 1e-8;
  c.detail = "max abs error " + fmt(worst) + ", tol 1e-8";
  return c;
}

Check check_price_identity(const SelftestOptions& o) {
  Rng rng(o.seed, 5);
  Worst w;
  for (int k = 0; k < o.points; ++k) {
    const double k1 = -2.0 + 4.0 * rng.uniform();
    const double k2 = -2.0 + 4.0 * rng.uniform();
    const double rho = -0.9 + 1.8 * rng.uniform();
    w.update(bvn_pdf(k1, k2, rho),
             central([&](double r) { return bvn_orthant(k1, k2, r); }, rho, 1e-5), kFloor,
             "dP/drho");
  }
  return finish("Price identity dP/drho = f", w, 1e-6);
}

Check check_binomial_moments() {
  double worst = 0.0;
  for (int n = 1; n <= 30; ++n) {
    for (double p : {0.0, 0.01, 0.1, 0.3, 0.5, 0.77, 0.95, 1.0}) {
      const MomentSet m = binomial_moments(p, n);
      const double got[4] = {m.m1, m.m2, m.m3, m.m4};
      boost::math::binomial_distribution<double> dist(n, p);
      for (int c = 1; c <= 4; ++c) {
        double ref = 0.0;
        for (int j = 0; j <= n; ++j) {
          ref += boost::math::pdf(dist, j) * std::pow(static_cast<double>(j) / n, c);
        }
        worst = std::max(worst, std::abs(got[c - 1] - ref));
      }
    }
  }
  Check c;
  c.name = "binomial moments vs pmf enumeration (N <= 30)";
  c.passed = worst <= 1e-13;
  c.detail = "max abs error " + fmt(worst) + ", tol 1e-13";
  return c;
}

Check check_joint_gap_scaling(const SelftestOptions& o) {
  const PairParams truth = PairParams::from_rho(0.25, 0.6, 0.5);
  std::vector<double> levels;
  for (int k = 1; k <= 10; ++k) levels.push_back(k / 10.0);
  const std::int64_t ns[3] = {100, 1000, 10000};
  std::vector<double> lx, ly;
  std::string detail;
  for (int idx = 0; idx < 3; ++idx) {
    const std::int64_t n_total = 10 * ns[idx];
    const ThresholdSchedule sched = ThresholdSchedule::staircase(2, n_total, levels);
    std::vector<double> gaps;
    for (int t = 0; t < o.scaling_trials; ++t) {
      const std::uint64_t seed = o.seed + 1000003ull * static_cast<std::uint64_t>(idx + 1) +
                                 static_cast<std::uint64_t>(t);
      try {
        const OneBitBatch b = quantize_real(sample_gaussian(truth, n_total, seed), sched);
        RecoveryOptions opts;
        opts.method = Method::kTimeVarying;
        const PairEstimate sep = estimate_pair(b, 0, 1, opts);
        const PairEstimate joint = joint_mle(pair_counts(b, 0, 1), sep.params, opts.joint);
        gaps.push_back(std::abs(joint.params.sigma1 - sep.params.sigma1));
      } catch (const Error&) {
      }
    }
    if (gaps.empty()) {
      Check c{"joint-vs-separate gap scaling", false, "no successful trials"};
      return c;
    }
    std::nth_element(gaps.begin(), gaps.begin() + static_cast<long>(gaps.size() / 2),
                     gaps.end());
    const double med = gaps[gaps.size() / 2];
    lx.push_back(std::log10(static_cast<double>(ns[idx])));
    ly.push_back(std::log10(med));
    detail += "n=" + std::to_string(ns[idx]) + ": median " + fmt(med) + "; ";
  }
  const double mx = (lx[0] + lx[1] + lx[2]) / 3.0;
  const double my = (ly[0] + ly[1] + ly[2]) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int k = 0; k < 3; ++k) {
    sxy += (lx[static_cast<std::size_t>(k)] - mx) * (ly[static_cast<std::size_t>(k)] - my);
    sxx += std::pow(lx[static_cast<std::size_t>(k)] - mx, 2);
  }
  const double slope = sxy / sxx;
  Check c;
  c.name = "joint-vs-separate gap scaling";
  c.passed = std::abs(slope + 0.5) <= 0.15;
  c.detail = detail + "slope " + fmt(slope) + " (target -0.5 +- 0.15)";
  return c;
}

Check check_zero_threshold_fim() {
  const ThresholdSchedule zero = ThresholdSchedule::zero(2, 1000);
  const TheoryReport corr = fim_report(PairParams::from_rho(0.7, 1.3, 0.4), zero);
  const Eigen::Matrix3d f0 = fim(PairParams::from_rho(0.7, 1.3, 0.0), zero);
  Eigen::FullPivLU<Eigen::Matrix3d> lu(corr.fim);
  lu.setThreshold(1e-10);
  const bool zero_rows = f0.row(0).isZero(0.0) && f0.row(1).isZero(0.0);
  Check c;
  c.name = "zero-threshold FIM is rank deficient in sigma1, sigma2";
  c.passed = corr.rank_deficient && lu.rank() == 1 && zero_rows;
  c.detail = "rank " + std::to_string(lu.rank()) + ", flagged " +
             (corr.rank_deficient ? "yes" : "no") + ", sigma rows zero at rho=0: " +
             (zero_rows ? "yes" : "no");
  return c;
}

std::vector<Check> run_selftest(const SelftestOptions& options) {
  std::vector<Check> out;
  out.push_back(check_scores(options));
  out.push_back(check_second_derivatives(options));
  out.push_back(check_regularity(options));
  out.push_back(check_orthant_quadrature(options));
  out.push_back(check_price_identity(options));
  out.push_back(check_binomial_moments());
  if (options.include_scaling) out.push_back(check_joint_gap_scaling(options));
  out.push_back(check_zero_threshold_fim());
  return out;
}

}  // namespace onebit
