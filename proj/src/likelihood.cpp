#include "onebit/likelihood.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "onebit/error.hpp"
#include "onebit/gauss.hpp"

namespace onebit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int outcome_index(int x1, int x2) { return (x1 > 0 ? 0 : 2) + (x2 > 0 ? 0 : 1); }

// Log-probability of a single-channel sign x given a = v / sigma.
double log_marginal(int x, double a) { return log_q(x * a); }

}  // namespace

std::int64_t ChannelCounts::total() const {
  std::int64_t n = 0;
  for (const auto& g : groups) n += g.total();
  return n;
}

std::int64_t PairCounts::total() const {
  std::int64_t n = 0;
  for (const auto& g : groups) n += g.total();
  return n;
}

ChannelCounts PairCounts::first() const {
  ChannelCounts out;
  std::map<std::uint64_t, std::size_t> index;
  for (const auto& g : groups) {
    auto [it, inserted] = index.try_emplace(std::bit_cast<std::uint64_t>(g.v1),
                                            out.groups.size());
    if (inserted) out.groups.push_back({g.v1, 0, 0});
    auto& c = out.groups[it->second];
    c.n_plus += g.n[0] + g.n[1];
    c.n_minus += g.n[2] + g.n[3];
  }
  return out;
}

ChannelCounts PairCounts::second() const {
  ChannelCounts out;
  std::map<std::uint64_t, std::size_t> index;
  for (const auto& g : groups) {
    auto [it, inserted] = index.try_emplace(std::bit_cast<std::uint64_t>(g.v2),
                                            out.groups.size());
    if (inserted) out.groups.push_back({g.v2, 0, 0});
    auto& c = out.groups[it->second];
    c.n_plus += g.n[0] + g.n[2];
    c.n_minus += g.n[1] + g.n[3];
  }
  return out;
}

ChannelCounts channel_counts(const OneBitBatch& batch, int channel) {
  if (batch.is_complex()) throw UsageError("channel_counts: expects a real batch");
  if (channel < 0 || channel >= batch.channels) {
    throw UsageError("channel_counts: channel out of range");
  }
  ChannelCounts out;
  std::map<std::uint64_t, std::size_t> index;
  std::size_t last = 0;
  for (std::int64_t t = 0; t < batch.samples; ++t) {
    const double v = batch.schedule.nominal(channel, t);
    if (out.groups.empty() || out.groups[last].v != v) {
      auto [it, inserted] =
          index.try_emplace(std::bit_cast<std::uint64_t>(v), out.groups.size());
      if (inserted) out.groups.push_back({v, 0, 0});
      last = it->second;
    }
    auto& g = out.groups[last];
    if (batch.sign(channel, t) > 0) {
      ++g.n_plus;
    } else {
      ++g.n_minus;
    }
  }
  return out;
}

PairCounts pair_counts(const OneBitBatch& batch, int first, int second) {
  if (batch.is_complex()) throw UsageError("pair_counts: expects a real batch");
  if (first < 0 || second < 0 || first >= batch.channels || second >= batch.channels) {
    throw UsageError("pair_counts: channel out of range");
  }
  PairCounts out;
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::size_t> index;
  std::size_t last = 0;
  for (std::int64_t t = 0; t < batch.samples; ++t) {
    const double v1 = batch.schedule.nominal(first, t);
    const double v2 = batch.schedule.nominal(second, t);
    if (out.groups.empty() || out.groups[last].v1 != v1 || out.groups[last].v2 != v2) {
      auto [it, inserted] = index.try_emplace(
          {std::bit_cast<std::uint64_t>(v1), std::bit_cast<std::uint64_t>(v2)},
          out.groups.size());
      if (inserted) out.groups.push_back({v1, v2, {}});
      last = it->second;
    }
    ++out.groups[last].n[static_cast<std::size_t>(
        outcome_index(batch.sign(first, t), batch.sign(second, t)))];
  }
  return out;
}

LikelihoodTerms likelihood_terms(const PairParams& p, double v1, double v2, int x1,
                                 int x2) {
  const double s1 = p.sigma1;
  const double s2 = p.sigma2;
  const double rho = p.rho();
  LikelihoodTerms t;
  t.w1 = v1 / s1;
  t.w2 = v2 / s2;
  t.z1 = x1 * t.w1;
  t.z2 = x2 * t.w2;
  t.p1 = q(t.w1);
  t.p2 = q(t.w2);
  t.p12 = bvn_orthant(t.w1, t.w2, rho);
  t.o = bvn_orthant(t.z1, t.z2, x1 * x2 * rho);
  t.q1 = x1 > 0 ? t.p1 : -q(-t.w1);
  t.q2 = x2 > 0 ? t.p2 : -q(-t.w2);
  t.delta1_1 = v1 / (kSqrt2Pi * s1 * s1) * std::exp(-t.w1 * t.w1 / 2.0);
  t.delta1_2 = v2 / (kSqrt2Pi * s2 * s2) * std::exp(-t.w2 * t.w2 / 2.0);
  t.delta2_1 = (v1 * v1 * v1 - 2.0 * v1 * s1 * s1) / (kSqrt2Pi * std::pow(s1, 5)) *
               std::exp(-t.w1 * t.w1 / 2.0);
  t.delta2_2 = (v2 * v2 * v2 - 2.0 * v2 * s2 * s2) / (kSqrt2Pi * std::pow(s2, 5)) *
               std::exp(-t.w2 * t.w2 / 2.0);
  t.u = t.w1 * t.w1 + t.w2 * t.w2 - 2.0 * rho * t.w1 * t.w2;
  const double s12 = s1 * s2;
  t.delta1_cross = x1 * x2 * bvn_pdf(t.w1, t.w2, rho) / s12;
  t.delta2_cross = x1 * x2 * bvn_pdf_drho(t.w1, t.w2, rho) / (s12 * s12);
  const double re = x1 * x2 * rho;
  t.score << g_fn(t.z1, t.z2, re) / (s1 * t.o), g_fn(t.z2, t.z1, re) / (s2 * t.o),
      t.delta1_cross / t.o;
  return t;
}

ScalarDerivs channel_loglik(const ChannelCounts& counts, double sigma) {
  ScalarDerivs out;
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    out.value = kNegInf;
    return out;
  }
  for (const auto& g : counts.groups) {
    const double a = g.v / sigma;
    for (int x : {+1, -1}) {
      const auto n = static_cast<double>(x > 0 ? g.n_plus : g.n_minus);
      if (n == 0.0) continue;
      // With lambda the Gaussian hazard:
      //   d log Q(x a) / d sigma   = x a lambda(x a) / sigma
      //   d^2 log Q(x a) / dsigma^2 = x (a^3 - 2a) lambda / sigma^2 - (first)^2
      const double lam = hazard(x * a);
      const double d1 = x * a * lam / sigma;
      const double d2 = x * (a * a * a - 2.0 * a) * lam / (sigma * sigma) - d1 * d1;
      out.value += n * log_marginal(x, a);
      out.d1 += n * d1;
      out.d2 += n * d2;
    }
  }
  return out;
}

ScalarDerivs pair_loglik_sigma12(const PairCounts& counts, double sigma1, double sigma2,
                                 double sigma12) {
  ScalarDerivs out;
  const double s12 = sigma1 * sigma2;
  const double rho = sigma12 / s12;
  if (!(std::abs(rho) < 1.0)) {
    out.value = kNegInf;
    return out;
  }
  for (const auto& g : counts.groups) {
    const double w1 = g.v1 / sigma1;
    const double w2 = g.v2 / sigma2;
    const double f = bvn_pdf(w1, w2, rho);
    const double fr = bvn_pdf_drho(w1, w2, rho);
    for (std::size_t k = 0; k < 4; ++k) {
      const auto n = static_cast<double>(g.n[k]);
      if (n == 0.0) continue;
      const int x1 = kOutcomes[k][0];
      const int x2 = kOutcomes[k][1];
      const double o = bvn_orthant(x1 * w1, x2 * w2, x1 * x2 * rho);
      if (!(o > 0.0)) {
        out.value = kNegInf;
        return out;
      }
      const double d1 = x1 * x2 * f / (s12 * o);
      const double d2 = x1 * x2 * fr / (s12 * s12 * o) - d1 * d1;
      out.value += n * std::log(o);
      out.d1 += n * d1;
      out.d2 += n * d2;
    }
  }
  return out;
}

PairLoglik pair_loglik(const PairCounts& counts, const PairParams& params,
                       bool with_gradient) {
  PairLoglik out;
  const double s1 = params.sigma1;
  const double s2 = params.sigma2;
  if (!(s1 > 0.0) || !(s2 > 0.0) || !std::isfinite(s1) || !std::isfinite(s2)) {
    out.value = kNegInf;
    return out;
  }
  const double rho = params.rho();
  if (!(std::abs(rho) < 1.0)) {
    out.value = kNegInf;
    return out;
  }
  for (const auto& g : counts.groups) {
    const double w1 = g.v1 / s1;
    const double w2 = g.v2 / s2;
    const double f = with_gradient ? bvn_pdf(w1, w2, rho) : 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto n = static_cast<double>(g.n[k]);
      if (n == 0.0) continue;
      const int x1 = kOutcomes[k][0];
      const int x2 = kOutcomes[k][1];
      const double z1 = x1 * w1;
      const double z2 = x2 * w2;
      const double re = x1 * x2 * rho;
      const double o = bvn_orthant(z1, z2, re);
      if (!(o > 0.0)) {
        out.value = kNegInf;
        return out;
      }
      out.value += n * std::log(o);
      if (with_gradient) {
        out.grad[0] += n * g_fn(z1, z2, re) / (s1 * o);
        out.grad[1] += n * g_fn(z2, z1, re) / (s2 * o);
        out.grad[2] += n * x1 * x2 * f / (s1 * s2 * o);
      }
    }
  }
  return out;
}

}  // namespace onebit
