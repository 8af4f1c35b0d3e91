#pragma once

// Scalar and bivariate standard Gaussian special functions.
//
// Conventions: q() is the upper tail Pr{Z > a}; bvn_orthant(k1, k2, rho) is
// the upper-right orthant Pr{Y1 > k1, Y2 > k2} of a unit-variance bivariate
// normal with correlation rho. All functions are pure.

namespace onebit {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Standard normal density.
double phi(double a);

// Upper-tail probability Q(a). Throws DomainError for non-finite a.
double q(double a);

// log Q(a), accurate far into the upper tail where q() underflows.
double log_q(double a);

// Hazard phi(a)/Q(a), finite for every finite a.
double hazard(double a);

// Inverse of q on (0, 1). Throws DomainError for p outside (0, 1).
double q_inv(double p);

// Unit-variance bivariate normal density with correlation rho.
double bvn_pdf(double y1, double y2, double rho);

// d/d rho of bvn_pdf.
double bvn_pdf_drho(double y1, double y2, double rho);

// Pr{Y1 > k1, Y2 > k2}; |rho| < 1 required (DomainError otherwise).
double bvn_orthant(double k1, double k2, double rho);

// Closed-form orthant limit at rho = +1 (Q(max(k1, k2))) or rho = -1
// (max(0, Q(k1) + Q(k2) - 1)). `sign` must be +1 or -1.
double bvn_orthant_degenerate(double k1, double k2, int sign);

// Physicists' Hermite polynomial H_k(a).
double hermite(int k, double a);

// Kernel of sigma1 * d p12 / d sigma1:
//   k1 phi(k1) Q((k2 - rho k1) / sqrt(1 - rho^2)) - rho f(k1, k2 | rho).
double g_fn(double k1, double k2, double rho);

}  // namespace onebit
