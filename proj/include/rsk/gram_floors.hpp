#pragma once

// Lower bounds on the minimum eigenvalue of expected smoothing Gram matrices,
// expressed through the design's separation distance q_X. Each bound has the
// form  constant * shape(q_X, ...)  where the shape is analytic and the
// constant depends only on the case and the ambient dimension. The constants
// are calibrated empirically by tools/calibrate_floors (half the smallest
// observed eigenvalue/shape ratio over a large design sample) and frozen
// here; regenerate them with the tool whenever the sampler below changes.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rsk/kernels.hpp"
#include "rsk/noise.hpp"
#include "rsk/rng.hpp"
#include "rsk/smoothing.hpp"

namespace rsk {

// The three kernel/noise pairings the floors cover.
enum class GramFloorCase {
    LaplaceRadial,   // radial polynomial-decay kernel + generalized Laplace noise
    LaplaceTensor,   // tensor-product kernel + per-coordinate Laplace noise
    GaussianRadial,  // radial polynomial-decay kernel + Gaussian noise
};

// Frequency scale up to which a design separated by q_X stays resolvable.
inline double separation_frequency(double q_x, int D) {
    if (!(q_x > 0.0))
        throw std::invalid_argument(
            "separation_frequency: q_x must be positive (duplicate points?)");
    const double g = std::tgamma(0.5 * D + 1.0);
    constexpr double pi = 3.141592653589793238462643383;
    return (12.0 / q_x) * std::pow(pi * g * g / 9.0, 1.0 / (D + 1));
}

// Constant-free part of the floor. m_eps is ignored by the Gaussian case.
inline double gram_floor_shape(GramFloorCase c, int D, double q_x, double m0,
                               double m_eps, double sigma_n) {
    const double M = separation_frequency(q_x, D);
    const double m2 = M * M;
    const double s2m2 = sigma_n * sigma_n * m2;
    const double amp = std::pow(M, D);
    switch (c) {
        case GramFloorCase::LaplaceRadial:
            return std::pow(1.0 + 4.0 * m2, -m0) *
                   std::pow(1.0 + 4.0 * s2m2, -m_eps) * amp;
        case GramFloorCase::LaplaceTensor:
            return std::pow(1.0 + 4.0 * m2, -m0 * D) *
                   std::pow(1.0 + 4.0 * s2m2, -m_eps * D) * amp;
        case GramFloorCase::GaussianRadial:
            return std::pow(1.0 + 4.0 * m2, -m0) * std::exp(-8.0 * s2m2) * amp;
    }
    throw std::logic_error("gram_floor_shape: unreachable");
}

// Frozen calibrated constants, one per covered (case, dimension) pair: half
// the smallest eigenvalue/shape ratio over 3000 designs per pair
// (calibrate_floors --designs 3000, seed 7001), rounded down. Uncovered pairs
// throw.
inline double gram_floor_constant(GramFloorCase c, int D) {
    double v = -1.0;
    switch (c) {
        case GramFloorCase::LaplaceRadial:
            if (D == 1) v = 1.1e3;
            break;
        case GramFloorCase::LaplaceTensor:
            if (D == 2) v = 6.0e8;
            if (D == 3) v = 5.4e12;
            break;
        case GramFloorCase::GaussianRadial:
            if (D == 1) v = 4.5e2;
            break;
    }
    if (v > 0.0) return v;
    throw std::out_of_range(
        "gram_floor_constant: no calibrated constant for this case/dimension");
}

inline double gram_eigen_floor(GramFloorCase c, int D, double q_x, double m0,
                               double m_eps, double sigma_n) {
    return gram_floor_constant(c, D) *
           gram_floor_shape(c, D, q_x, m0, m_eps, sigma_n);
}

// ---------------------------------------------------------------------------
// Shared design sampler and observation helper. The calibration tool and the
// floor checks must draw from exactly this distribution: the frozen constants
// are only meaningful for designs it can produce.

struct FloorDesign {
    GramFloorCase fcase = GramFloorCase::LaplaceRadial;
    int D = 1;
    Eigen::MatrixXd points;  // n x D, rows in [0,1]^D
    double m0 = 1.5;
    double m_eps = 1.0;   // ignored by the Gaussian case
    double sigma_n = 0.1;
};

// Dimensions with an exact expected-kernel route for each case: the radial
// cases integrate a univariate spectrum, the tensor case factorizes.
inline std::vector<int> floor_case_dims(GramFloorCase c) {
    switch (c) {
        case GramFloorCase::LaplaceRadial: return {1};
        case GramFloorCase::LaplaceTensor: return {2, 3};
        case GramFloorCase::GaussianRadial: return {1};
    }
    throw std::logic_error("floor_case_dims: unreachable");
}

// Designs: n in {4..10} (Gaussian case {4..8}), kernel smoothness in
// {1.5, 2.5}, noise shape U[0.75, 1.75], noise scale U[0.02, 0.3] (Gaussian
// case U[0.002, 0.02], where the floor decays much faster in sigma). Points
// keep q_X bounded away from zero: on the line a jittered grid, above it
// rejection sampling, so every floor stays within certifiable range.
inline FloorDesign sample_floor_design(GramFloorCase c, int D, Rng& rng) {
    FloorDesign d;
    d.fcase = c;
    d.D = D;
    const bool gauss = c == GramFloorCase::GaussianRadial;
    const int n_lo = 4;
    const int n_hi = gauss ? 8 : 10;
    int n = n_lo + static_cast<int>(rng.uniform() * (n_hi - n_lo + 1));
    n = std::min(n, n_hi);
    d.m0 = rng.uniform() < 0.5 ? 1.5 : 2.5;
    d.m_eps = 0.75 + rng.uniform();
    d.sigma_n = gauss ? 0.002 + 0.018 * rng.uniform()
                      : 0.02 + 0.28 * rng.uniform();

    d.points.resize(n, D);
    if (D == 1) {
        for (int i = 0; i < n; ++i)
            d.points(i, 0) =
                (i + 0.5 + 0.35 * (2.0 * rng.uniform() - 1.0)) / n;
    } else {
        const double min_dist = 0.15 * std::pow(n, -1.0 / D);
        for (int tries = 0;; ++tries) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < D; ++j) d.points(i, j) = rng.uniform();
            if (separation_distance(d.points) >= 0.5 * min_dist) break;
            if (tries > 5000)
                throw std::runtime_error(
                    "sample_floor_design: separation rejection stalled");
        }
    }
    return d;
}

inline KernelSpec floor_kernel(const FloorDesign& d) {
    const double phi = 0.7071067811865476;
    if (d.fcase == GramFloorCase::LaplaceTensor) {
        std::vector<KernelSpec> factors(
            static_cast<size_t>(d.D), KernelSpec::matern(d.m0, phi, 1));
        return KernelSpec::tensor(std::move(factors));
    }
    return KernelSpec::matern(d.m0, phi, d.D);
}

inline NoiseSpec floor_noise(const FloorDesign& d) {
    switch (d.fcase) {
        case GramFloorCase::LaplaceRadial:
            return NoiseSpec::generalized_laplace(d.sigma_n, d.m_eps, d.D);
        case GramFloorCase::LaplaceTensor:
            return NoiseSpec::tensor_generalized_laplace(d.sigma_n, d.m_eps,
                                                         d.D);
        case GramFloorCase::GaussianRadial:
            return NoiseSpec::gaussian(d.sigma_n, d.D);
    }
    throw std::logic_error("floor_noise: unreachable");
}

struct FloorObservation {
    double eta_n = 0.0;  // smallest eigenvalue of the expected Gram
    double shape = 0.0;  // constant-free floor shape at the design's q_X
};

inline FloorObservation observe_floor(const FloorDesign& d,
                                      double tol = 1e-10) {
    const KernelSpec kernel = floor_kernel(d);
    const NoiseSpec noise = floor_noise(d);
    const int n = static_cast<int>(d.points.rows());
    ExpectedKernelOptions opts;
    opts.tol = tol;
    Eigen::MatrixXd gram(n, n);
    Eigen::VectorXd diff(d.D);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            diff = (d.points.row(i) - d.points.row(j)).transpose();
            gram(i, j) = gram(j, i) =
                expected_smoothing_kernel(kernel, noise, diff, opts);
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram,
                                                      Eigen::EigenvaluesOnly);
    FloorObservation o;
    o.eta_n = es.eigenvalues()(0);
    o.shape = gram_floor_shape(d.fcase, d.D, separation_distance(d.points),
                               d.m0, d.m_eps, d.sigma_n);
    return o;
}

}  // namespace rsk
