#pragma once

// Self-check suite behind the `verify` subcommand: each check exercises one
// provable property of the library at a stated scale and returns a structured
// pass/fail with the measured quantities. `quick` shrinks grids and draw
// counts to stay interactive; the full scales match the documented gates.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsk/datagen.hpp"
#include "rsk/gram_floors.hpp"
#include "rsk/kernel_gd.hpp"
#include "rsk/mlp.hpp"
#include "rsk/noise.hpp"
#include "rsk/rng.hpp"
#include "rsk/smoothing.hpp"

namespace rsk {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

namespace detail {

class CheckTimer {
  public:
    CheckTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

inline double slope_loglog(const std::vector<double>& x,
                           const std::vector<double>& y) {
    const size_t m = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < m; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double dm = static_cast<double>(m);
    return (dm * sxy - sx * sy) / (dm * sxx - sx * sx);
}

inline std::vector<double> logspace(double lo, double hi, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = std::pow(10.0, lo + (hi - lo) * i / (count - 1));
    return out;
}

inline std::vector<long> logspaced_ints(double hi_exp, int count) {
    std::set<long> vals;
    for (int i = 0; i < count; ++i)
        vals.insert(std::lround(std::pow(10.0, hi_exp * i / (count - 1))));
    return {vals.begin(), vals.end()};
}

inline SmoothedGram random_line_gram(int n, double sigma_n, int draws,
                                     Rng& rng) {
    Eigen::MatrixXd pts(n, 1);
    for (int i = 0; i < n; ++i) pts(i, 0) = rng.uniform();
    const auto kernel = KernelSpec::matern(2.5, 0.7071067811865476, 1);
    const auto noise = NoiseSpec::gaussian(sigma_n, 1);
    GramOptions gopts;
    gopts.x_max_hint = 1.0;
    return build_gram(kernel, noise, draws, pts, rng, gopts);
}

}  // namespace detail

// Sup-gap between the empirical and expected smoothing kernels over a
// difference grid shrinks like N^{-1/2} up to log factors; the fitted
// log-log slope must land in [-0.65, -0.35].
inline CheckResult check_sup_gap_slope(bool quick, std::uint64_t seed) {
    detail::CheckTimer timer;
    const auto kernel = KernelSpec::matern(2.5, 0.7071067811865476, 1);
    const auto noise = NoiseSpec::gaussian(0.1, 1);
    std::vector<int> n_grid = {100, 1000, 10000};
    if (!quick) n_grid.push_back(100000);
    const int reps = quick ? 2 : 4;
    std::vector<double> diffs;
    for (int i = 0; i <= 40; ++i) diffs.push_back(0.05 * i);

    Rng rng(derive_seed(seed, 0));
    const auto rows = sup_gap_estimate(kernel, noise, n_grid, diffs, reps, rng);
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        xs.push_back(static_cast<double>(r.N));
        ys.push_back(r.mean_sup_gap);
    }
    const double slope = detail::slope_loglog(xs, ys);

    CheckResult res;
    res.name = "sup_gap_slope";
    res.pass = slope >= -0.65 && slope <= -0.35;
    res.detail = "slope " + detail::fmt(slope) + " over N in [" +
                 std::to_string(n_grid.front()) + ", " +
                 std::to_string(n_grid.back()) + "], band [-0.65, -0.35]";
    res.seconds = timer.seconds();
    return res;
}

// Early stopping vs ridge: the two per-eigenvalue inequalities hold on a
// dense (eta, t) grid, and the RKHS norm of the iterate stays within four
// times the matched ridge solution on random smoothed problems.
inline CheckResult check_comparison_audit(bool quick, std::uint64_t seed) {
    detail::CheckTimer timer;
    const auto etas = detail::logspace(-6.0, 2.0, quick ? 33 : 81);
    const auto ts = detail::logspaced_ints(5.0, quick ? 11 : 26);
    const double beta = 0.9 / etas.back();

    long violations = 0;
    double max_slack = -std::numeric_limits<double>::infinity();
    for (double eta : etas)
        for (long t : ts) {
            const auto [s1, s2] = audit_eigenvalue(eta, beta, t);
            max_slack = std::max({max_slack, s1, s2});
            if (s1 > 1e-12 || s2 > 1e-12) ++violations;
        }

    Rng rng(derive_seed(seed, 1));
    bool norms_ok = true;
    double max_norm_slack = -std::numeric_limits<double>::infinity();
    const auto gram =
        detail::random_line_gram(quick ? 24 : 40, 0.1, quick ? 200 : 400, rng);
    Eigen::VectorXd y(gram.n());
    for (int i = 0; i < gram.n(); ++i) y(i) = rng.normal();
    const double gbeta = 0.9 / gram.eigenvalues(0);
    for (long t : {1L, 10L, 100L, 1000L, 10000L}) {
        const auto rep = comparison_audit(gram, y, gbeta, t);
        norms_ok = norms_ok && rep.ok;
        max_norm_slack = std::max(max_norm_slack, rep.norm_slack);
        violations += rep.violations;
    }

    CheckResult res;
    res.name = "comparison_audit";
    res.pass = violations == 0 && norms_ok;
    res.detail = std::to_string(violations) + " violations over " +
                 std::to_string(etas.size()) + "x" + std::to_string(ts.size()) +
                 " grid; max scalar slack " + detail::fmt(max_slack) +
                 ", max norm slack " + detail::fmt(max_norm_slack);
    res.seconds = timer.seconds();
    return res;
}

// The spectral closed form of gradient descent must match the iterative
// update to near machine precision, with and without weight decay.
inline CheckResult check_closed_vs_iterative(bool quick, std::uint64_t seed) {
    detail::CheckTimer timer;
    const int problems = quick ? 6 : 20;
    double worst = 0.0;
    Rng rng(derive_seed(seed, 2));
    for (int p = 0; p < problems; ++p) {
        const int n = 8 + static_cast<int>(rng.uniform() * 43);
        const auto gram = detail::random_line_gram(n, 0.15, 200, rng);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y(i) = rng.normal();
        const double beta = 0.9 / gram.eigenvalues(0);
        for (long t : {1L, 10L, 1000L})
            for (double alpha : {0.0, 1e-3}) {
                TrainConfig closed;
                closed.beta = beta;
                closed.alpha = alpha;
                closed.mode = FitMode::ClosedForm;
                closed.stop = StopRule::fixed(t);
                closed.t_max = std::max<long>(closed.t_max, t);
                TrainConfig iter = closed;
                iter.mode = FitMode::Iterative;
                const auto a = gd_fit(gram, y, closed);
                const auto b = gd_fit(gram, y, iter);
                // Compare the iterate itself: weight vectors divide by
                // eigenvalues at the pseudo-inverse cut, which amplifies
                // rounding noise without saying anything about the dynamics.
                const double rel =
                    (a.fitted_values - b.fitted_values).norm() /
                    std::max(a.fitted_values.norm(), 1e-12);
                worst = std::max(worst, rel);
            }
    }
    CheckResult res;
    res.name = "closed_vs_iterative";
    res.pass = worst <= 1e-8;
    res.detail = "max relative disagreement " + detail::fmt(worst) + " over " +
                 std::to_string(problems) +
                 " problems, t in {1,10,1000}, decay in {0, 1e-3}";
    res.seconds = timer.seconds();
    return res;
}

// Gaussian kernel + Gaussian noise: the convolution closed form, the
// spectral quadrature, and Monte Carlo must tell the same story.
inline CheckResult check_spectral_oracle(bool quick, std::uint64_t seed) {
    detail::CheckTimer timer;
    const auto k1 = KernelSpec::gaussian(0.5, 1);
    const auto n1 = NoiseSpec::gaussian(0.3, 1);
    double max_quad_err = 0.0;
    for (double d : {0.0, 0.5, 1.3, 2.0}) {
        const double closed = expected_smoothing_kernel(k1, n1, d);
        ExpectedKernelOptions opts;
        opts.route = ExpectedKernelRoute::Quadrature;
        const double quad = expected_smoothing_kernel(k1, n1, d, opts);
        max_quad_err = std::max(max_quad_err, std::abs(closed - quad));
    }

    const auto k2 = KernelSpec::gaussian(0.5, 2);
    const auto n2 = NoiseSpec::gaussian(0.3, 2);
    Eigen::VectorXd d2(2);
    d2 << 0.3, -0.4;
    const double closed2 = expected_smoothing_kernel(k2, n2, d2);
    const long draws = quick ? 20000 : 100000;
    const auto mc = expected_smoothing_kernel_mc(k2, n2, d2, draws,
                                                 derive_seed(seed, 3));
    const double mc_sigmas = std::abs(mc.value - closed2) /
                             std::max(mc.std_error, 1e-300);

    CheckResult res;
    res.name = "spectral_oracle";
    res.pass = max_quad_err <= 1e-6 && mc_sigmas < 3.0;
    res.detail = "closed vs quadrature " + detail::fmt(max_quad_err) +
                 " (<= 1e-6); Monte Carlo " + detail::fmt(mc_sigmas) +
                 " standard errors at " + std::to_string(draws) + " draws";
    res.seconds = timer.seconds();
    return res;
}

// Empirical characteristic functions of the three noise samplers must match
// the analytic forms at 20 frequencies within 3 N^{-1/2}.
inline CheckResult check_noise_cf(bool quick, std::uint64_t seed) {
    detail::CheckTimer timer;
    const int N = quick ? 20000 : 100000;
    const double tol = 3.0 / std::sqrt(static_cast<double>(N));
    const NoiseSpec laws[] = {
        NoiseSpec::gaussian(0.2, 1),
        NoiseSpec::generalized_laplace(0.3, 1.2, 1),
        NoiseSpec::tensor_generalized_laplace(0.25, 0.8, 2),
    };
    double worst = 0.0;
    int law_idx = 0;
    for (const auto& law : laws) {
        Rng rng(derive_seed(seed, 10 + law_idx));
        const auto draws = sample(law, N, rng);
        for (int f = 0; f < 20; ++f) {
            Eigen::VectorXd omega(law.ambient_dim);
            const double r = 0.25 + 4.75 * f / 19.0;
            if (law.ambient_dim == 1) {
                omega(0) = r;
            } else {
                const double angle = 2.39996322972865332 * f;
                omega(0) = r * std::cos(angle);
                omega(1) = r * std::sin(angle);
            }
            std::complex<double> acc(0.0, 0.0);
            for (const auto& e : draws) {
                const double phase = omega.dot(e);
                acc += std::complex<double>(std::cos(phase), std::sin(phase));
            }
            acc /= static_cast<double>(N);
            const double err = std::abs(acc - std::complex<double>(
                                                  characteristic_fn(law, omega),
                                                  0.0));
            worst = std::max(worst, err);
        }
        ++law_idx;
    }
    CheckResult res;
    res.name = "noise_cf";
    res.pass = worst <= tol;
    res.detail = "max |empirical - analytic| " + detail::fmt(worst) +
                 " vs bound " + detail::fmt(tol) + " at N = " +
                 std::to_string(N);
    res.seconds = timer.seconds();
    return res;
}

// Backpropagation against central finite differences, sampled away from the
// ReLU kinks where the loss is differentiable.
inline CheckResult check_mlp_gradient(bool quick, std::uint64_t seed) {
    detail::CheckTimer timer;
    const int configs = quick ? 10 : 40;
    double worst = 0.0;
    Rng rng(derive_seed(seed, 4));
    for (int c = 0; c < configs; ++c) {
        const int D = 1 + c % 3;
        const auto model = MlpModel::kaiming(D, 7, 7, rng);
        Eigen::VectorXd x(D);
        do {
            for (int j = 0; j < D; ++j) x(j) = rng.normal();
        } while (kink_margin(model, x) < 1e-3);
        const double y = rng.normal();
        worst = std::max(worst, grad_check(model, x, y));
    }
    CheckResult res;
    res.name = "mlp_gradient";
    res.pass = worst < 1e-4;
    res.detail = "max relative gradient error " + detail::fmt(worst) +
                 " over " + std::to_string(configs) + " kink-free configs";
    res.seconds = timer.seconds();
    return res;
}

// Expected-Gram minimum eigenvalues against the frozen calibrated floors.
inline CheckResult check_gram_floors(bool quick, std::uint64_t seed) {
    detail::CheckTimer timer;
    const int per_case = quick ? 24 : 100;
    int violations = 0, designs = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    for (auto c : {GramFloorCase::LaplaceRadial, GramFloorCase::LaplaceTensor,
                   GramFloorCase::GaussianRadial}) {
        const auto dims = floor_case_dims(c);
        const int per_dim = per_case / static_cast<int>(dims.size());
        for (size_t di = 0; di < dims.size(); ++di) {
            Rng rng(derive_seed(seed, 20 + 7 * static_cast<int>(c) + di));
            for (int i = 0; i < per_dim; ++i) {
                const auto design = sample_floor_design(c, dims[di], rng);
                const auto obs = observe_floor(design);
                const double floor = gram_eigen_floor(
                    c, dims[di], separation_distance(design.points), design.m0,
                    design.m_eps, design.sigma_n);
                ++designs;
                if (!(obs.eta_n >= floor)) ++violations;
                if (floor > 0.0)
                    min_margin = std::min(min_margin, obs.eta_n / floor);
            }
        }
    }
    CheckResult res;
    res.name = "gram_floors";
    res.pass = violations == 0;
    res.detail = std::to_string(violations) + " violations over " +
                 std::to_string(designs) + " designs; min margin " +
                 detail::fmt(min_margin);
    res.seconds = timer.seconds();
    return res;
}

inline std::vector<CheckResult> run_verify(bool quick,
                                           std::uint64_t seed = 1729) {
    return {
        check_sup_gap_slope(quick, seed),
        check_comparison_audit(quick, seed),
        check_closed_vs_iterative(quick, seed),
        check_spectral_oracle(quick, seed),
        check_noise_cf(quick, seed),
        check_mlp_gradient(quick, seed),
        check_gram_floors(quick, seed),
    };
}

}  // namespace rsk
