#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rsk/rng.hpp"

// Augmentation-noise laws and their characteristic functions. The isotropic
// generalized Laplace law is sampled as sigma_n * sqrt(G) * Z with
// G ~ Gamma(m_eps, 1) and Z standard normal, which gives the characteristic
// function (1 + sigma_n^2 |w|^2 / 2)^{-m_eps} exactly; the tensor variant
// draws an independent G_j per coordinate.

namespace rsk {

enum class NoiseLaw { Gaussian, GeneralizedLaplace, TensorGeneralizedLaplace, None };

struct NoiseSpec {
  NoiseLaw law = NoiseLaw::None;
  double sigma_n = 0.0;  // smoothing scale, >= 0
  double m_eps = 1.0;    // shape of the Laplace families
  int ambient_dim = 1;

  static NoiseSpec none(int D) {
    NoiseSpec s;
    s.law = NoiseLaw::None;
    s.ambient_dim = D;
    s.validate();
    return s;
  }

  static NoiseSpec gaussian(double sigma_n, int D) {
    NoiseSpec s;
    s.law = NoiseLaw::Gaussian;
    s.sigma_n = sigma_n;
    s.ambient_dim = D;
    s.validate();
    return s;
  }

  static NoiseSpec generalized_laplace(double sigma_n, double m_eps, int D) {
    NoiseSpec s;
    s.law = NoiseLaw::GeneralizedLaplace;
    s.sigma_n = sigma_n;
    s.m_eps = m_eps;
    s.ambient_dim = D;
    s.validate();
    return s;
  }

  static NoiseSpec tensor_generalized_laplace(double sigma_n, double m_eps,
                                              int D) {
    NoiseSpec s;
    s.law = NoiseLaw::TensorGeneralizedLaplace;
    s.sigma_n = sigma_n;
    s.m_eps = m_eps;
    s.ambient_dim = D;
    s.validate();
    return s;
  }

  bool is_degenerate() const {
    return law == NoiseLaw::None || sigma_n == 0.0;
  }

  void validate() const {
    if (ambient_dim < 1)
      throw std::invalid_argument("NoiseSpec: ambient_dim >= 1 required");
    if (law == NoiseLaw::None) return;
    if (!(sigma_n >= 0.0))
      throw std::invalid_argument("NoiseSpec: sigma_n >= 0 required");
    if (law == NoiseLaw::GeneralizedLaplace && !(m_eps > 0.5 * ambient_dim))
      throw std::invalid_argument(
          "NoiseSpec: GeneralizedLaplace needs m_eps > D/2");
    if (law == NoiseLaw::TensorGeneralizedLaplace && !(m_eps > 0.5))
      throw std::invalid_argument(
          "NoiseSpec: TensorGeneralizedLaplace needs m_eps > 1/2");
  }
};

inline std::vector<Eigen::VectorXd> sample(const NoiseSpec& spec, int N,
                                           Rng& rng) {
  if (N < 1) throw std::invalid_argument("sample: N >= 1 required");
  const int D = spec.ambient_dim;
  std::vector<Eigen::VectorXd> out(N, Eigen::VectorXd::Zero(D));
  if (spec.is_degenerate()) return out;
  switch (spec.law) {
    case NoiseLaw::Gaussian:
      for (auto& e : out)
        for (int j = 0; j < D; ++j) e(j) = spec.sigma_n * rng.normal();
      break;
    case NoiseLaw::GeneralizedLaplace:
      for (auto& e : out) {
        const double scale = spec.sigma_n * std::sqrt(rng.gamma(spec.m_eps));
        for (int j = 0; j < D; ++j) e(j) = scale * rng.normal();
      }
      break;
    case NoiseLaw::TensorGeneralizedLaplace:
      for (auto& e : out)
        for (int j = 0; j < D; ++j)
          e(j) = spec.sigma_n * std::sqrt(rng.gamma(spec.m_eps)) * rng.normal();
      break;
    case NoiseLaw::None:
      break;
  }
  return out;
}

inline double characteristic_fn(const NoiseSpec& spec,
                                const Eigen::VectorXd& omega) {
  if (omega.size() != spec.ambient_dim)
    throw std::invalid_argument("characteristic_fn: omega dimension mismatch");
  if (spec.is_degenerate()) return 1.0;
  const double s2 = spec.sigma_n * spec.sigma_n;
  switch (spec.law) {
    case NoiseLaw::Gaussian:
      return std::exp(-0.5 * s2 * omega.squaredNorm());
    case NoiseLaw::GeneralizedLaplace:
      return std::pow(1.0 + 0.5 * s2 * omega.squaredNorm(), -spec.m_eps);
    case NoiseLaw::TensorGeneralizedLaplace: {
      double prod = 1.0;
      for (int j = 0; j < spec.ambient_dim; ++j)
        prod *= std::pow(1.0 + 0.5 * s2 * omega(j) * omega(j), -spec.m_eps);
      return prod;
    }
    case NoiseLaw::None:
      return 1.0;
  }
  throw std::logic_error("characteristic_fn: unreachable");
}

inline double characteristic_fn(const NoiseSpec& spec, double omega) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(spec.ambient_dim);
  w(0) = omega;
  return characteristic_fn(spec, w);
}

namespace detail {

// Upper bound for |phi_eps(w)|^2 at |w| >= W; used for quadrature truncation.
inline double cf_sq_upper_1d(const NoiseSpec& spec, double W) {
  if (spec.is_degenerate()) return 1.0;
  const double s2 = spec.sigma_n * spec.sigma_n;
  switch (spec.law) {
    case NoiseLaw::Gaussian:
      return std::exp(-s2 * W * W);
    case NoiseLaw::GeneralizedLaplace:
    case NoiseLaw::TensorGeneralizedLaplace:
      return std::pow(1.0 + 0.5 * s2 * W * W, -2.0 * spec.m_eps);
    case NoiseLaw::None:
      return 1.0;
  }
  return 1.0;
}

// Frequency scale over which the CF varies; panel sizing hint.
inline double cf_scale_1d(const NoiseSpec& spec) {
  if (spec.is_degenerate()) return 1e300;
  return 1.0 / spec.sigma_n;
}

}  // namespace detail

}  // namespace rsk
