#pragma once

// Simulation-study data: points on low-dimensional manifolds, Gaussian
// process ground truths, and noisy regression datasets.
//
// A ground truth is drawn once on a dense anchor grid and then defined to BE
// the kernel interpolant of that draw: f*(x) = k(x)^T (Sigma + jitter I)^{-1}
// g. The stored anchor values are the interpolant's own values, so
// re-evaluating at an anchor reproduces them to arithmetic precision and the
// function is consistent across train/val/test queries.

#include <Eigen/Dense>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "rsk/kernels.hpp"
#include "rsk/rng.hpp"

namespace rsk {

enum class ManifoldKind { Line, Circle, Sphere };

struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::Line;
  double radius = 1.0;

  int ambient_dim() const {
    switch (kind) {
      case ManifoldKind::Line: return 1;
      case ManifoldKind::Circle: return 2;
      case ManifoldKind::Sphere: return 3;
    }
    return 1;
  }
  int intrinsic_dim() const {
    return kind == ManifoldKind::Sphere ? 2 : 1;
  }

  static ManifoldSpec line() { return {ManifoldKind::Line, 1.0}; }
  static ManifoldSpec circle(double r = 1.0) {
    if (!(r > 0)) throw std::invalid_argument("manifold: radius must be > 0");
    return {ManifoldKind::Circle, r};
  }
  static ManifoldSpec sphere(double r = 1.0) {
    if (!(r > 0)) throw std::invalid_argument("manifold: radius must be > 0");
    return {ManifoldKind::Sphere, r};
  }
};

// Uniform draws: Line on [0,1); Circle by uniform angle; Sphere by
// normalized Gaussians. Rows are points.
inline Eigen::MatrixXd sample_manifold(const ManifoldSpec& spec, int n,
                                       Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_manifold: need n >= 1");
  const int D = spec.ambient_dim();
  Eigen::MatrixXd X(n, D);
  constexpr double tau = 6.283185307179586476925287;
  switch (spec.kind) {
    case ManifoldKind::Line:
      for (int i = 0; i < n; ++i) X(i, 0) = rng.uniform();
      break;
    case ManifoldKind::Circle:
      for (int i = 0; i < n; ++i) {
        const double th = tau * rng.uniform();
        X(i, 0) = spec.radius * std::cos(th);
        X(i, 1) = spec.radius * std::sin(th);
      }
      break;
    case ManifoldKind::Sphere:
      for (int i = 0; i < n; ++i) {
        double a, b, c, norm;
        do {
          a = rng.normal();
          b = rng.normal();
          c = rng.normal();
          norm = std::sqrt(a * a + b * b + c * c);
        } while (norm < 1e-12);
        X(i, 0) = spec.radius * a / norm;
        X(i, 1) = spec.radius * b / norm;
        X(i, 2) = spec.radius * c / norm;
      }
      break;
  }
  return X;
}

// Dense deterministic anchor grid: equispaced on the line (endpoints
// included), equal angles on the circle, Fibonacci lattice on the sphere.
inline Eigen::MatrixXd manifold_grid(const ManifoldSpec& spec, int m) {
  if (m < 2) throw std::invalid_argument("manifold_grid: need m >= 2");
  const int D = spec.ambient_dim();
  Eigen::MatrixXd Z(m, D);
  constexpr double tau = 6.283185307179586476925287;
  switch (spec.kind) {
    case ManifoldKind::Line:
      for (int i = 0; i < m; ++i)
        Z(i, 0) = static_cast<double>(i) / (m - 1);
      break;
    case ManifoldKind::Circle:
      for (int i = 0; i < m; ++i) {
        const double th = tau * i / m;
        Z(i, 0) = spec.radius * std::cos(th);
        Z(i, 1) = spec.radius * std::sin(th);
      }
      break;
    case ManifoldKind::Sphere: {
      const double golden = tau * (1.0 - 1.0 / 1.6180339887498948482);
      for (int i = 0; i < m; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / m;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double th = golden * i;
        Z(i, 0) = spec.radius * r * std::cos(th);
        Z(i, 1) = spec.radius * r * std::sin(th);
        Z(i, 2) = spec.radius * z;
      }
      break;
    }
  }
  return Z;
}

struct GroundTruth {
  Eigen::MatrixXd anchors;    // m x D
  Eigen::VectorXd values;     // interpolant values at the anchors
  Eigen::VectorXd weights;    // (Sigma + jitter I)^{-1} raw draw
  KernelSpec covariance;
  double jitter_used = 0;

  double eval(const Eigen::VectorXd& x) const {
    const auto m = anchors.rows();
    double acc = 0;
    for (Eigen::Index j = 0; j < m; ++j)
      acc += weights(j) *
             kernel_eval(covariance,
                         Eigen::VectorXd(x - anchors.row(j).transpose()));
    return acc;
  }

  Eigen::VectorXd eval(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      out(i) = eval(Eigen::VectorXd(X.row(i).transpose()));
    return out;
  }
};

// Draw one GP sample path. g ~ N(0, Sigma + jitter I) via Cholesky; a
// failed factorization escalates the jitter tenfold up to 1e-6 before
// giving up.
inline GroundTruth draw_ground_truth(const ManifoldSpec& spec,
                                     const KernelSpec& covariance, int m,
                                     double jitter, Rng& rng) {
  if (!(jitter > 0))
    throw std::invalid_argument("draw_ground_truth: jitter must be > 0");
  if (covariance.ambient_dim != spec.ambient_dim())
    throw std::invalid_argument(
        "draw_ground_truth: covariance dimension does not match manifold");
  GroundTruth gt;
  gt.covariance = covariance;
  gt.anchors = manifold_grid(spec, m);

  Eigen::MatrixXd sigma(m, m);
  for (int i = 0; i < m; ++i) {
    sigma(i, i) = kernel_eval(covariance, Eigen::VectorXd::Zero(
                                              spec.ambient_dim()));
    for (int j = i + 1; j < m; ++j) {
      const double v = kernel_eval(
          covariance,
          Eigen::VectorXd(gt.anchors.row(i) - gt.anchors.row(j)));
      sigma(i, j) = v;
      sigma(j, i) = v;
    }
  }

  Eigen::VectorXd z(m);
  for (int i = 0; i < m; ++i) z(i) = rng.normal();

  Eigen::LLT<Eigen::MatrixXd> llt;
  double delta = jitter;
  for (;; delta *= 10.0) {
    Eigen::MatrixXd work = sigma;
    work.diagonal().array() += delta;
    llt.compute(work);
    if (llt.info() == Eigen::Success) break;
    if (delta >= 1e-6)
      throw std::runtime_error(
          "draw_ground_truth: covariance factorization failed up to jitter "
          "1e-6");
  }
  gt.jitter_used = delta;

  const Eigen::VectorXd raw = llt.matrixL() * z;
  gt.weights = llt.solve(raw);
  gt.values = gt.eval(gt.anchors);
  return gt;
}

struct Dataset {
  Eigen::MatrixXd train_X, val_X, test_X;
  Eigen::VectorXd train_y, val_y, test_y;  // test targets are noiseless f*
  double noise_var = 0.01;
};

// Independent train/val/test draws; |val| = ceil(n/2); observation noise
// N(0, noise_var) on train and val only.
inline Dataset make_dataset(const GroundTruth& gt, const ManifoldSpec& spec,
                            int n_train, Rng& rng, double noise_var = 0.01,
                            int n_test = 500) {
  if (n_train < 2) throw std::invalid_argument("make_dataset: need n >= 2");
  if (noise_var < 0)
    throw std::invalid_argument("make_dataset: noise_var must be >= 0");
  Dataset ds;
  ds.noise_var = noise_var;
  const int n_val = (n_train + 1) / 2;
  ds.train_X = sample_manifold(spec, n_train, rng);
  ds.val_X = sample_manifold(spec, n_val, rng);
  ds.test_X = sample_manifold(spec, n_test, rng);
  const double sd = std::sqrt(noise_var);
  ds.train_y = gt.eval(ds.train_X);
  for (int i = 0; i < n_train; ++i) ds.train_y(i) += sd * rng.normal();
  ds.val_y = gt.eval(ds.val_X);
  for (int i = 0; i < n_val; ++i) ds.val_y(i) += sd * rng.normal();
  ds.test_y = gt.eval(ds.test_X);
  return ds;
}

// x coordinates, response, split label; one row per observation.
inline void dataset_to_csv(std::ostream& os, const Dataset& ds) {
  const auto D = ds.train_X.cols();
  for (Eigen::Index j = 0; j < D; ++j) os << "x" << j << ",";
  os << "y,split\n";
  os.precision(17);
  auto block = [&](const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const char* label) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index j = 0; j < D; ++j) os << X(i, j) << ",";
      os << y(i) << "," << label << "\n";
    }
  };
  block(ds.train_X, ds.train_y, "train");
  block(ds.val_X, ds.val_y, "val");
  block(ds.test_X, ds.test_y, "test");
}

}  // namespace rsk
