#pragma once

// Hyperparameter schedules for random-smoothing kernel gradient descent.
//
// Each regime maps (n, D, d, m0, mf) to the smoothing scale, noise
// smoothness, iteration count, weight-decay strength, and ridge level that
// achieve the n^{-2 mf / (2 mf + d)} convergence rate (n^{-2 mf / (2 mf + 1)}
// in the tensor regime). All asymptotic prescriptions carry a user-settable
// proportionality constant c_prop; the hidden step-size constant is fixed at
// beta = 1/n, which makes lambda_n = 1 / t_star.
//
// Conventions baked in here:
//  * log means natural log throughout.
//  * t_star is integer-valued but stored as a double: the polynomial regime
//    prescribes m_eps ~ log n, and the resulting iteration counts overflow
//    64-bit integers long before n leaves desk scale.
//  * GaussianSmoothing has no noise-smoothness parameter of its own; its
//    weight-decay display is evaluated with m_eps = mf and that value is
//    reported back.
//  * TensorPolySmoothing takes m_eps = max(mf - m0, 1), the smallest
//    constant order compatible with m_eps + m0 >= mf.
//  * PolySmoothing with target_gap a > 0 switches the smoothing-scale
//    exponent to its any-polynomial-gap form (rate exponent worsens by a);
//    the noise-smoothness display is unchanged since that branch leaves the
//    choice open.

#include <cmath>
#include <stdexcept>
#include <string>

namespace rsk {

enum class SmoothingRegime {
  PolySmoothing,
  GaussianSmoothing,
  TensorPolySmoothing,
};

inline const char* regime_name(SmoothingRegime r) {
  switch (r) {
    case SmoothingRegime::PolySmoothing: return "poly";
    case SmoothingRegime::GaussianSmoothing: return "gaussian";
    case SmoothingRegime::TensorPolySmoothing: return "tensor_poly";
  }
  return "unknown";
}

struct ScheduleParams {
  SmoothingRegime regime = SmoothingRegime::GaussianSmoothing;
  double sigma_n = 0;     // smoothing scale c * n^nu
  double m_eps = 0;       // noise smoothness driving the schedule
  double t_star = 1;      // early-stopping iteration count (integer-valued)
  double alpha_star = 0;  // weight-decay strength, in (0, 1)
  double lambda_n = 0;    // equivalent ridge level (beta t_star)^{-1} / n
  double c_prop = 1;
  double nu = 0;             // sigma_n = c_prop * n^nu, nu <= 0
  double rate_exponent = 0;  // L2 error decays like n^{rate_exponent}
  double t_wd_floor = 1;     // iteration floor for the weight-decay variant
};

// schedule: fill every display of the requested regime.
//
// Preconditions: mf > D/2, m0 > D/2, 1 <= d <= D, n >= 2, c_prop > 0,
// target_gap >= 0 (only PolySmoothing consumes a positive target_gap).
// Throws std::domain_error on violations or if a display overflows the
// double range.
inline ScheduleParams schedule(SmoothingRegime regime, long n, int D, int d,
                               double m0, double mf, double c_prop = 1.0,
                               double target_gap = 0.0) {
  if (n < 2) throw std::domain_error("schedule: n must be at least 2");
  if (d < 1 || d > D) throw std::domain_error("schedule: need 1 <= d <= D");
  if (!(mf > 0.5 * D))
    throw std::domain_error("schedule: target smoothness must exceed D/2");
  if (!(m0 > 0.5 * D))
    throw std::domain_error("schedule: kernel smoothness must exceed D/2");
  if (!(c_prop > 0))
    throw std::domain_error("schedule: proportionality constant must be > 0");
  if (target_gap < 0)
    throw std::domain_error("schedule: rate gap must be nonnegative");

  const double ln_n = std::log(static_cast<double>(n));
  const double log_c = std::log(c_prop);

  ScheduleParams p;
  p.regime = regime;
  p.c_prop = c_prop;

  double log_t = 0, log_alpha = 0, wd_scale = 0;
  switch (regime) {
    case SmoothingRegime::PolySmoothing: {
      const double me =
          2.0 / d * (2.0 * D * std::max(m0, mf) + m0 * d) * ln_n - m0;
      const double delta =
          target_gap > 0 ? (2.0 * mf + d) * target_gap / d : 1.0 / ln_n;
      double nu = 0;
      if (D > d) {
        const double num =
            2.0 * (2.0 * m0 + 2.0 * me) * D - (2.0 * m0 + 2.0 * me - D) * d;
        const double den =
            (2.0 * mf + d) *
            (4.0 * me * D - (2.0 * m0 + 2.0 * (1.0 - delta) * me - D) * d);
        nu = -num / den;
      }
      p.m_eps = me;
      p.nu = nu;
      const double log_sigma = log_c + nu * ln_n;
      p.sigma_n = std::exp(log_sigma);
      log_t = log_c + 2.0 * (m0 + me) / (2.0 * mf + d) * ln_n +
              2.0 * me * log_sigma;
      log_alpha = log_c - (1.0 + 2.0 * (m0 + me) / (2.0 * mf + d)) * ln_n -
                  2.0 * me * log_sigma;
      p.rate_exponent = -2.0 * mf / (2.0 * mf + d) + target_gap;
      wd_scale = mf / (2.0 * mf + d) + 0.5;
      break;
    }
    case SmoothingRegime::GaussianSmoothing: {
      p.m_eps = mf;
      p.nu = -1.0 / (2.0 * mf + d);
      p.sigma_n = std::exp(log_c + p.nu * ln_n);
      log_t = log_c + (2.0 * m0 + 2.0 * mf) / (2.0 * mf + d) * ln_n;
      log_alpha = log_c - (1.0 + 2.0 * (m0 + mf) / (2.0 * mf + d)) * ln_n;
      p.rate_exponent = -2.0 * mf / (2.0 * mf + d);
      wd_scale = mf / (2.0 * mf + d) + 0.5;
      break;
    }
    case SmoothingRegime::TensorPolySmoothing: {
      const double me = std::max(mf - m0, 1.0);
      p.m_eps = me;
      p.nu = 0.0;
      p.sigma_n = c_prop;
      const double log_pow =
          (2.0 * (D - 1) * (m0 + me) + 1.0) / (2.0 * mf + 1.0);
      log_t = log_c + 2.0 * (m0 + me) / (2.0 * mf + 1.0) * ln_n +
              log_pow * std::log(ln_n);
      log_alpha = log_c - (1.0 + 2.0 * (m0 + me) / (2.0 * mf + d)) * ln_n +
                  log_pow * std::log(ln_n);
      p.rate_exponent = -2.0 * mf / (2.0 * mf + 1.0);
      wd_scale = mf / (2.0 * mf + 1.0) + 0.5;
      break;
    }
  }

  const double t_raw = std::exp(log_t);
  if (!std::isfinite(t_raw))
    throw std::domain_error("schedule: iteration count overflows double");
  p.t_star = std::max(1.0, std::round(t_raw));
  p.alpha_star = std::exp(log_alpha);
  if (!(p.alpha_star > 0) || !(p.alpha_star < 1))
    throw std::domain_error("schedule: weight-decay strength left (0, 1)");
  p.lambda_n = 1.0 / p.t_star;  // beta = 1/n: (beta t)^{-1} / n = 1 / t
  // Iteration floor t >= (mf/(2mf+d) + 1/2) log n / |log(1 - alpha)|.
  p.t_wd_floor =
      std::max(1.0, std::ceil(wd_scale * ln_n / -std::log1p(-p.alpha_star)));
  if (!std::isfinite(p.t_wd_floor))
    throw std::domain_error("schedule: weight-decay floor overflows double");
  return p;
}

}  // namespace rsk
