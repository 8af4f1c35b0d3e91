#include "onebit/gauss.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "onebit/error.hpp"

namespace onebit {

namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Lower-tail CDF.
double big_phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

void require_finite(double a, const char* fn) {
  if (!std::isfinite(a)) {
    throw DomainError(std::string(fn) + ": non-finite argument");
  }
}

void require_open_corr(double rho, const char* fn) {
  if (!(std::abs(rho) < 1.0)) {
    throw DomainError(std::string(fn) + ": |rho| must be < 1, got " +
                      std::to_string(rho));
  }
}

// Mills ratio Q(a)/phi(a) by Lentz-free backward continued fraction,
// used only for a >= 8 where 60 terms give full double precision.
double mills_ratio_tail(double a) {
  double frac = a;
  for (int k = 60; k >= 1; --k) {
    frac = a + k / frac;
  }
  return 1.0 / frac;
}

// Acklam's rational approximation to the lower-tail quantile, ~1e-9 rel.
double acklam(double p) {
  static constexpr std::array<double, 6> a = {
      -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {
      -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {
      -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {
      7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double s = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * s + c[1]) * s + c[2]) * s + c[3]) * s + c[4]) * s + c[5]) /
           ((((d[0] * s + d[1]) * s + d[2]) * s + d[3]) * s + 1.0);
  }
  const double s = p - 0.5;
  const double r = s * s;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * s /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Lower-tail quantile for p <= 1/2, Halley-refined against erfc.
double lower_quantile(double p) {
  double x = acklam(p);
  for (int it = 0; it < 2; ++it) {
    const double e = big_phi(x) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

// Gauss-Legendre abscissae/weights (half rules) for 6, 12 and 20 points.
struct LegendreRule {
  int size;
  std::array<double, 10> w;
  std::array<double, 10> x;
};

constexpr LegendreRule kRule6 = {
    3,
    {0.1713244923791705, 0.3607615730481384, 0.4679139345726904},
    {-0.9324695142031522, -0.6612093864662647, -0.2386191860831970}};
constexpr LegendreRule kRule12 = {
    6,
    {0.4717533638651177e-01, 0.1069393259953183, 0.1600783285433464,
     0.2031674267230659, 0.2334925365383547, 0.2491470458134029},
    {-0.9815606342467191, -0.9041172563704750, -0.7699026741943050,
     -0.5873179542866171, -0.3678314989981802, -0.1252334085114692}};
constexpr LegendreRule kRule20 = {
    10,
    {0.1761400713915212e-01, 0.4060142980038694e-01, 0.6267204833410906e-01,
     0.8327674157670475e-01, 0.1019301198172404, 0.1181945319615184,
     0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
     0.1527533871307259},
    {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259,
     -0.8391169718222188, -0.7463319064601508, -0.6360536807265150,
     -0.5108670019508271, -0.3737060887154196, -0.2277858511416451,
     -0.7652652113349733e-01}};

}  // namespace

double phi(double a) { return kInvSqrt2Pi * std::exp(-0.5 * a * a); }

double q(double a) {
  require_finite(a, "q");
  return 0.5 * std::erfc(a / std::sqrt(2.0));
}

double log_q(double a) {
  require_finite(a, "log_q");
  if (a < 8.0) return std::log(q(a));
  return -0.5 * a * a - kLogSqrt2Pi + std::log(mills_ratio_tail(a));
}

double hazard(double a) {
  require_finite(a, "hazard");
  if (a < 8.0) return phi(a) / q(a);
  return 1.0 / mills_ratio_tail(a);
}

double q_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("q_inv: p must lie in (0, 1), got " + std::to_string(p));
  }
  // Q(a) = p  <=>  Phi(-a) = p.  1 - p is exact for p >= 1/2.
  if (p <= 0.5) return -lower_quantile(p);
  return lower_quantile(1.0 - p);
}

double bvn_pdf(double y1, double y2, double rho) {
  require_open_corr(rho, "bvn_pdf");
  const double one_m = 1.0 - rho * rho;
  const double u = y1 * y1 - 2.0 * rho * y1 * y2 + y2 * y2;
  return std::exp(-u / (2.0 * one_m)) / (kTwoPi * std::sqrt(one_m));
}

double bvn_pdf_drho(double y1, double y2, double rho) {
  const double f = bvn_pdf(y1, y2, rho);
  const double one_m = 1.0 - rho * rho;
  const double u = y1 * y1 - 2.0 * rho * y1 * y2 + y2 * y2;
  return f * ((rho + y1 * y2) / one_m - rho * u / (one_m * one_m));
}

// Genz's BVNU: Drezner-Wesolowsky style Gauss-Legendre integration of the
// asin-transformed Plackett identity, with an asymptotic expansion for
// |rho| >= 0.925. Absolute accuracy ~1e-15.
double bvn_orthant(double k1, double k2, double rho) {
  require_finite(k1, "bvn_orthant");
  require_finite(k2, "bvn_orthant");
  require_open_corr(rho, "bvn_orthant");

  const double abs_r = std::abs(rho);
  const LegendreRule& rule = abs_r < 0.3 ? kRule6 : (abs_r < 0.75 ? kRule12 : kRule20);

  double h = k1;
  double k = k2;
  double hk = h * k;
  double bvn = 0.0;

  if (abs_r < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(rho);
    for (int i = 0; i < rule.size; ++i) {
      double sn = std::sin(asr * (rule.x[i] + 1.0) / 2.0);
      bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (-rule.x[i] + 1.0) / 2.0);
      bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return std::clamp(bvn * asr / (2.0 * kTwoPi) + big_phi(-h) * big_phi(-k), 0.0, 1.0);
  }

  if (rho < 0.0) {
    k = -k;
    hk = -hk;
  }
  const double as = (1.0 - rho) * (1.0 + rho);
  double a = std::sqrt(as);
  const double bs = (h - k) * (h - k);
  const double c = (4.0 - hk) / 8.0;
  const double d = (12.0 - hk) / 16.0;
  bvn = a * std::exp(-(bs / as + hk) / 2.0) *
        (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
  if (hk > -160.0) {
    const double b = std::sqrt(bs);
    bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * big_phi(-b / a) * b *
           (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
  }
  a /= 2.0;
  for (int i = 0; i < rule.size; ++i) {
    double xs = (a * (rule.x[i] + 1.0)) * (a * (rule.x[i] + 1.0));
    double rs = std::sqrt(1.0 - xs);
    bvn += a * rule.w[i] *
           (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs -
            std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
    xs = as * (-rule.x[i] + 1.0) * (-rule.x[i] + 1.0) / 4.0;
    rs = std::sqrt(1.0 - xs);
    bvn += a * rule.w[i] * std::exp(-(bs / xs + hk) / 2.0) *
           (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
            (1.0 + c * xs * (1.0 + d * xs)));
  }
  bvn = -bvn / kTwoPi;

  if (rho > 0.0) {
    bvn += big_phi(-std::max(h, k));
  } else {
    bvn = -bvn + std::max(0.0, big_phi(-h) - big_phi(-k));
  }
  return std::clamp(bvn, 0.0, 1.0);
}

double bvn_orthant_degenerate(double k1, double k2, int sign) {
  require_finite(k1, "bvn_orthant_degenerate");
  require_finite(k2, "bvn_orthant_degenerate");
  if (sign == 1) return q(std::max(k1, k2));
  if (sign == -1) return std::max(0.0, q(k1) + q(k2) - 1.0);
  throw DomainError("bvn_orthant_degenerate: sign must be +1 or -1");
}

double hermite(int k, double a) {
  if (k < 0) throw DomainError("hermite: order must be >= 0");
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * a;
  for (int j = 1; j < k; ++j) {
    const double next = 2.0 * a * cur - 2.0 * j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double g_fn(double k1, double k2, double rho) {
  require_open_corr(rho, "g_fn");
  const double s = std::sqrt(1.0 - rho * rho);
  return k1 * phi(k1) * q((k2 - rho * k1) / s) - rho * bvn_pdf(k1, k2, rho);
}

}  // namespace onebit
