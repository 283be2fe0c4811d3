#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsk/quadrature.hpp"
#include "rsk/special_math.hpp"

// Stationary positive-definite kernel families and their spectral densities.
//
// Fourier convention throughout: F(g)(w) = (2pi)^{-D/2} Int g(x) e^{-i w.x} dx,
// so that g(x) = (2pi)^{-D/2} Int F(g)(w) e^{i w.x} dw. spectral_density
// returns the transform that is exactly consistent with kernel_eval under
// this convention; smoothing-kernel quadrature and the Fourier-consistency
// tests depend on that.

namespace rsk {

enum class KernelFamily { Matern, GeneralizedWendland, Gaussian, TensorProduct };

struct KernelSpec {
  KernelFamily family = KernelFamily::Matern;
  // Matern: smoothness m0 > D/2; order nu = m0 - D/2, decay rate
  //   2*phi*sqrt(nu). Wendland: m0 is derived as (D+1)/2 + kappa.
  double m0 = 1.5;
  // Matern: inverse-lengthscale parameter phi > 0. Gaussian: phi is the
  // width sigma of K(x) = variance * exp(-|x|^2 / (4 phi^2)). Wendland:
  // support radius is 1/phi.
  double phi = 1.0;
  double kappa = 1.0;  // Wendland shape, > 0
  double mu = 2.0;     // Wendland shape, >= (D+1)/2 + kappa
  double variance = 1.0;
  int ambient_dim = 1;
  std::vector<KernelSpec> factors;  // TensorProduct: exactly D 1-D factors

  static KernelSpec matern(double m0, double phi, int D, double variance = 1.0) {
    KernelSpec s;
    s.family = KernelFamily::Matern;
    s.m0 = m0;
    s.phi = phi;
    s.ambient_dim = D;
    s.variance = variance;
    s.validate();
    return s;
  }

  // Classical parameterization (order nu, lengthscale rho): equivalent to
  // matern(m0 = nu + D/2, phi = 1/(sqrt(2) rho)); the decay rates
  // 2 phi sqrt(nu) and sqrt(2 nu)/rho coincide.
  static KernelSpec matern_classical(double nu, double rho, double sigma2,
                                     int D) {
    if (!(nu > 0.0) || !(rho > 0.0) || !(sigma2 > 0.0))
      throw std::invalid_argument("matern_classical: nu, rho, sigma2 > 0");
    return matern(nu + 0.5 * D, 1.0 / (std::sqrt(2.0) * rho), D, sigma2);
  }

  static KernelSpec gaussian(double sigma, int D, double variance = 1.0) {
    KernelSpec s;
    s.family = KernelFamily::Gaussian;
    s.phi = sigma;
    s.m0 = 0.0;
    s.ambient_dim = D;
    s.variance = variance;
    s.validate();
    return s;
  }

  static KernelSpec wendland(double kappa, double mu, double phi, int D,
                             double variance = 1.0) {
    KernelSpec s;
    s.family = KernelFamily::GeneralizedWendland;
    s.kappa = kappa;
    s.mu = mu;
    s.phi = phi;
    s.ambient_dim = D;
    s.variance = variance;
    s.m0 = 0.5 * (D + 1) + kappa;
    s.validate();
    return s;
  }

  static KernelSpec tensor(std::vector<KernelSpec> factor_list) {
    KernelSpec s;
    s.family = KernelFamily::TensorProduct;
    s.factors = std::move(factor_list);
    s.ambient_dim = static_cast<int>(s.factors.size());
    s.variance = 1.0;
    s.validate();
    return s;
  }

  void validate() const {
    if (ambient_dim < 1)
      throw std::invalid_argument("KernelSpec: ambient_dim >= 1 required");
    if (!(variance > 0.0))
      throw std::invalid_argument("KernelSpec: variance > 0 required");
    switch (family) {
      case KernelFamily::Matern:
        if (!(m0 > 0.5 * ambient_dim))
          throw std::invalid_argument("KernelSpec: Matern needs m0 > D/2");
        if (!(phi > 0.0))
          throw std::invalid_argument("KernelSpec: Matern needs phi > 0");
        break;
      case KernelFamily::GeneralizedWendland:
        if (!(kappa > 0.0))
          throw std::invalid_argument("KernelSpec: Wendland needs kappa > 0");
        if (!(mu >= 0.5 * (ambient_dim + 1) + kappa))
          throw std::invalid_argument(
              "KernelSpec: Wendland needs mu >= (D+1)/2 + kappa");
        if (!(phi > 0.0))
          throw std::invalid_argument("KernelSpec: Wendland needs phi > 0");
        break;
      case KernelFamily::Gaussian:
        if (!(phi > 0.0))
          throw std::invalid_argument("KernelSpec: Gaussian needs phi > 0");
        break;
      case KernelFamily::TensorProduct: {
        if (factors.empty())
          throw std::invalid_argument("KernelSpec: tensor needs factors");
        if (static_cast<int>(factors.size()) != ambient_dim)
          throw std::invalid_argument(
              "KernelSpec: tensor needs exactly D univariate factors");
        for (const auto& f : factors) {
          if (f.ambient_dim != 1)
            throw std::invalid_argument(
                "KernelSpec: tensor factors must be 1-D");
          if (f.family == KernelFamily::Matern && !(f.m0 > 0.5))
            throw std::invalid_argument(
                "KernelSpec: tensor Matern factors need m0 > 1/2");
          f.validate();
        }
        break;
      }
    }
  }
};

namespace detail {

// Matern profile at radius r (unit variance): 2^{1-nu}/Gamma(nu) (c r)^nu
// K_nu(c r), c = 2 phi sqrt(nu). Returns 1 at radii small enough that the
// Bessel factor would overflow; there the profile is 1 within 1e-16.
inline double matern_profile(double m0, double phi, int D, double r) {
  const double nu = m0 - 0.5 * D;
  const double c = 2.0 * phi * std::sqrt(nu);
  const double z = c * r;
  if (z < 1e-12) return 1.0;
  const double log_overflow_z =
      (std::lgamma(nu) - 705.0) / nu + 0.6931471805599453;
  if (std::log(z) < log_overflow_z) return 1.0;
  return std::exp((1.0 - nu) * 0.6931471805599453 - std::lgamma(nu) +
                  nu * std::log(z)) *
         bessel_k(nu, z);
}

// Wendland profile at radius r (unit variance): the normalized tail integral
// Int_a^1 u (u^2-a^2)^{kappa-1} (1-u)^mu du / Beta(2 kappa, mu+1), a = phi r.
// Substituting u^2 - a^2 = w^2 turns the integrand into
// w^{2 kappa - 1} (1 - sqrt(w^2 + a^2))^mu, smooth for half-integer kappa;
// 64-node Gauss-Legendre then resolves it to near machine precision.
inline double wendland_profile(double kappa, double mu, double phi, double r) {
  const double a = phi * r;
  if (a >= 1.0) return 0.0;
  const double b = std::sqrt(1.0 - a * a);
  const auto& rule = gauss_legendre_cached(64);
  const double integral = integrate_gl(
      [&](double w) {
        return std::pow(w, 2.0 * kappa - 1.0) *
               std::pow(1.0 - std::sqrt(w * w + a * a), mu);
      },
      0.0, b, rule);
  return integral / beta_fn(2.0 * kappa, mu + 1.0);
}

}  // namespace detail

inline double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& diff) {
  if (diff.size() != spec.ambient_dim)
    throw std::invalid_argument("kernel_eval: diff dimension mismatch");
  switch (spec.family) {
    case KernelFamily::Matern:
      return spec.variance * detail::matern_profile(spec.m0, spec.phi,
                                                    spec.ambient_dim,
                                                    diff.norm());
    case KernelFamily::Gaussian: {
      const double r2 = diff.squaredNorm();
      return spec.variance * std::exp(-r2 / (4.0 * spec.phi * spec.phi));
    }
    case KernelFamily::GeneralizedWendland:
      return spec.variance *
             detail::wendland_profile(spec.kappa, spec.mu, spec.phi,
                                      diff.norm());
    case KernelFamily::TensorProduct: {
      double prod = 1.0;
      Eigen::VectorXd d1(1);
      for (int j = 0; j < spec.ambient_dim; ++j) {
        d1(0) = diff(j);
        prod *= kernel_eval(spec.factors[j], d1);
      }
      return prod;
    }
  }
  throw std::logic_error("kernel_eval: unreachable");
}

// Scalar-offset convenience overload (offset along the first axis).
inline double kernel_eval(const KernelSpec& spec, double diff) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(spec.ambient_dim);
  d(0) = diff;
  return kernel_eval(spec, d);
}

inline double spectral_density(const KernelSpec& spec,
                               const Eigen::VectorXd& omega) {
  if (omega.size() != spec.ambient_dim)
    throw std::invalid_argument("spectral_density: omega dimension mismatch");
  const int D = spec.ambient_dim;
  switch (spec.family) {
    case KernelFamily::Matern: {
      const double nu = spec.m0 - 0.5 * D;
      const double c2 = 4.0 * spec.phi * spec.phi * nu;  // squared decay rate
      // F(K)(w) = 2^{D/2} Gamma(m0)/Gamma(nu) c2^{nu} (c2 + |w|^2)^{-m0}.
      const double log_amp = 0.5 * D * 0.6931471805599453 +
                             std::lgamma(spec.m0) - std::lgamma(nu) +
                             nu * std::log(c2);
      return spec.variance *
             std::exp(log_amp - spec.m0 * std::log(c2 + omega.squaredNorm()));
    }
    case KernelFamily::Gaussian: {
      // F(K)(w) = (sqrt(2) sigma)^D exp(-sigma^2 |w|^2).
      const double s = spec.phi;
      return spec.variance *
             std::pow(1.4142135623730951 * s, static_cast<double>(D)) *
             std::exp(-s * s * omega.squaredNorm());
    }
    case KernelFamily::TensorProduct: {
      double prod = 1.0;
      Eigen::VectorXd w1(1);
      for (int j = 0; j < D; ++j) {
        w1(0) = omega(j);
        prod *= spectral_density(spec.factors[j], w1);
      }
      return prod;
    }
    case KernelFamily::GeneralizedWendland:
      throw std::invalid_argument(
          "spectral_density: no closed-form spectrum for GeneralizedWendland");
  }
  throw std::logic_error("spectral_density: unreachable");
}

inline double spectral_density(const KernelSpec& spec, double omega) {
  Eigen::VectorXd w(spec.ambient_dim);
  w.setZero();
  w(0) = omega;
  return spectral_density(spec, w);
}

namespace detail {

inline bool has_closed_spectrum(const KernelSpec& spec) {
  switch (spec.family) {
    case KernelFamily::Matern:
    case KernelFamily::Gaussian:
      return true;
    case KernelFamily::TensorProduct:
      for (const auto& f : spec.factors)
        if (!has_closed_spectrum(f)) return false;
      return true;
    case KernelFamily::GeneralizedWendland:
      return false;
  }
  return false;
}

// Upper bound on Int_W^inf F(K)(w) dw for a 1-D spec; used to truncate
// spectral quadrature. Matern: amplitude * W^{1-2 m0} / (2 m0 - 1).
// Gaussian: amplitude * exp(-sigma^2 W^2) / (2 sigma^2 W).
inline double spectral_tail_mass_1d(const KernelSpec& spec, double W) {
  switch (spec.family) {
    case KernelFamily::Matern: {
      const double nu = spec.m0 - 0.5;
      const double c2 = 4.0 * spec.phi * spec.phi * nu;
      const double log_amp = 0.5 * 0.6931471805599453 + std::lgamma(spec.m0) -
                             std::lgamma(nu) + nu * std::log(c2);
      return spec.variance * std::exp(log_amp) *
             std::pow(W, 1.0 - 2.0 * spec.m0) / (2.0 * spec.m0 - 1.0);
    }
    case KernelFamily::Gaussian: {
      const double s = spec.phi;
      return spec.variance * 1.4142135623730951 * s *
             std::exp(-s * s * W * W) / (2.0 * s * s * W);
    }
    case KernelFamily::TensorProduct:
      if (spec.factors.size() == 1)
        return spectral_tail_mass_1d(spec.factors.front(), W);
      throw std::invalid_argument("spectral_tail_mass_1d: needs a 1-D spec");
    default:
      throw std::invalid_argument("spectral_tail_mass_1d: unsupported family");
  }
}

// Characteristic frequency scale over which F(K) varies; panel sizing hint.
inline double spectral_scale_1d(const KernelSpec& spec) {
  switch (spec.family) {
    case KernelFamily::Matern:
      return 2.0 * spec.phi * std::sqrt(spec.m0 - 0.5);
    case KernelFamily::Gaussian:
      return 1.0 / spec.phi;
    case KernelFamily::TensorProduct:
      if (spec.factors.size() == 1) return spectral_scale_1d(spec.factors.front());
      return 1.0;
    default:
      return 1.0;
  }
}

}  // namespace detail

}  // namespace rsk
