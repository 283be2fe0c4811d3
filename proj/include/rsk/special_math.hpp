#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

// Scalar special functions: Gamma, Beta, and the modified Bessel function of
// the second kind. Everything is 64-bit; arbitrary precision lives only in
// the offline test oracles.

namespace rsk {

inline double gamma_fn(double x) {
  if (!(x > 0.0)) throw std::domain_error("gamma_fn: requires x > 0");
  if (x > 170.0) throw std::overflow_error("gamma_fn: overflow for x > 170");
  return std::tgamma(x);
}

inline double beta_fn(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("beta_fn: requires a, b > 0");
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

namespace detail {

inline constexpr double kEulerGamma = 0.57721566490153286060651209;

// gam1(mu) = [1/Gamma(1-mu) - 1/Gamma(1+mu)] / (2 mu),  |mu| <= 1/2.
inline double temme_gam1(double mu) {
  if (std::abs(mu) < 1e-3) {
    // Cubic coefficient of 1/Gamma(1+mu); even expansion of gam1.
    const double b3 = 0.042002635034095236;
    return -kEulerGamma + b3 * mu * mu;
  }
  return (1.0 / std::tgamma(1.0 - mu) - 1.0 / std::tgamma(1.0 + mu)) /
         (2.0 * mu);
}

// K_{mu}(x) and K_{mu+1}(x) for |mu| <= 1/2, x <= 2, by Temme's series.
inline void besselk_temme(double mu, double x, double& kmu, double& kmu1) {
  const double eps = std::numeric_limits<double>::epsilon();
  const double x2 = 0.5 * x;
  const double pimu = 3.141592653589793238462643383 * mu;
  const double fact = (std::abs(pimu) < 1e-14) ? 1.0 : pimu / std::sin(pimu);
  double d = -std::log(x2);
  double e = mu * d;
  const double fact2 = (std::abs(e) < 1e-14) ? 1.0 : std::sinh(e) / e;
  const double gampl = 1.0 / std::tgamma(1.0 + mu);
  const double gammi = 1.0 / std::tgamma(1.0 - mu);
  const double gam1 = temme_gam1(mu);
  const double gam2 = 0.5 * (gammi + gampl);
  double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
  double sum = ff;
  e = std::exp(e);
  double p = 0.5 * e / gampl;
  double q = 0.5 / (e * gammi);
  double c = 1.0;
  d = x2 * x2;
  double sum1 = p;
  const double mu2 = mu * mu;
  for (int i = 1; i <= 500; ++i) {
    ff = (i * ff + p + q) / (i * i - mu2);
    c *= d / i;
    p /= (i - mu);
    q /= (i + mu);
    const double del = c * ff;
    sum += del;
    sum1 += c * (p - i * ff);
    if (std::abs(del) < std::abs(sum) * eps) break;
  }
  kmu = sum;
  kmu1 = sum1 * 2.0 / x;
}

// K_{mu}(x) and K_{mu+1}(x) for |mu| <= 1/2, x > 2, by the Thompson-Barnett
// steepest-descent continued fraction (CF2).
inline void besselk_cf2(double mu, double x, double& kmu, double& kmu1) {
  const double eps = std::numeric_limits<double>::epsilon();
  const double mu2 = mu * mu;
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25 - mu2;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= 5000; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < eps) break;
  }
  h = a1 * h;
  kmu = std::sqrt(3.141592653589793238462643383 / (2.0 * x)) * std::exp(-x) / s;
  kmu1 = kmu * (mu + x + 0.5 - h) / x;
}

// Exact finite sum: K_{n+1/2}(x) = sqrt(pi/(2x)) e^{-x} sum_k (n+k)! /
// (k! (n-k)! (2x)^k).
inline double besselk_half_integer(int n, double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= n; ++k) {
    term *= static_cast<double>((n + k) * (n - k + 1)) / (2.0 * k * x);
    sum += term;
  }
  return std::sqrt(3.141592653589793238462643383 / (2.0 * x)) * std::exp(-x) *
         sum;
}

}  // namespace detail

// Modified Bessel function of the second kind, order nu (order-symmetric, so
// negative nu is folded). Half-integer orders use the exact closed form;
// otherwise Temme's series (x <= 2) or CF2 (x > 2) evaluates K at the
// fractional order and stable upward recurrence lifts it.
inline double bessel_k(double nu, double x) {
  nu = std::abs(nu);
  if (!(x > 0.0)) throw std::domain_error("bessel_k: requires x > 0");
  if (nu > 0.0) {
    // Small-x magnitude estimate K ~ Gamma(nu) 2^{nu-1} / x^{nu} is an upper
    // envelope; signal before the arithmetic overflows.
    const double log_est =
        std::lgamma(nu) + nu * std::log(2.0 / x) - 0.6931471805599453;
    if (log_est > 705.0)
      throw std::overflow_error("bessel_k: result overflows for this (nu, x)");
  }
  const double half_frac = nu - std::floor(nu);
  if (std::abs(half_frac - 0.5) < 1e-13) {
    return detail::besselk_half_integer(static_cast<int>(std::floor(nu)), x);
  }
  const int n = static_cast<int>(std::lround(nu));
  const double mu = nu - n;  // in [-1/2, 1/2]
  double kmu, kmu1;
  if (x <= 2.0)
    detail::besselk_temme(mu, x, kmu, kmu1);
  else
    detail::besselk_cf2(mu, x, kmu, kmu1);
  // K_{m+1}(x) = K_{m-1}(x) + (2m/x) K_m(x), stable upward in the order.
  for (int i = 1; i < n; ++i) {
    const double knext = kmu + (2.0 * (mu + i) / x) * kmu1;
    kmu = kmu1;
    kmu1 = knext;
  }
  const double out = (n == 0) ? kmu : kmu1;
  if (!std::isfinite(out))
    throw std::overflow_error("bessel_k: result overflows for this (nu, x)");
  return out;
}

}  // namespace rsk
