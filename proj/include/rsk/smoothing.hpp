#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsk/kernels.hpp"
#include "rsk/noise.hpp"
#include "rsk/quadrature.hpp"
#include "rsk/rng.hpp"

// Empirical smoothing kernel K_S (average of the base kernel over all ordered
// pairs of a shared noise list), its population limit K~_S, Gram construction
// with cached eigendecomposition, and the augmentation-error sup-gap probe.
//
// Spectral identity used throughout: with F = F(K) and phi_eps the noise CF,
//   K~_S(d)  = (2pi)^{-D/2} Int F(w) |phi_eps(w)|^2 e^{-i w.d} dw,
//   K_S(d)   = (2pi)^{-D/2} Int F(w) |phi_hat(w)|^2 e^{-i w.d} dw,
// where phi_hat(w) = (1/N) sum_k e^{i w.eps_k}. Both integrands are even, so
// the e^{-iwd} factor reduces to cos(wd). For D = 1 and a closed-form F the
// empirical identity gives the fast path: tabulate w_q -> F(w_q)|phi_hat|^2
// once (O(QN)) and evaluate any difference in O(Q). The tabulated measure is
// nonnegative, so Gram matrices assembled from it are PSD by construction.

namespace rsk {

inline constexpr double kInvSqrtTau2 = 0.7978845608028654;  // 2 / sqrt(2 pi)

// q_X: half the minimum pairwise distance of the design.
inline double separation_distance(const Eigen::MatrixXd& points) {
  const int n = static_cast<int>(points.rows());
  if (n < 2) return std::numeric_limits<double>::infinity();
  double min2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      min2 = std::min(min2, (points.row(i) - points.row(j)).squaredNorm());
  return 0.5 * std::sqrt(min2);
}

// ---------------------------------------------------------------------------
// Empirical smoothing kernel, exact pairwise form.

inline double empirical_smoothing_kernel(const KernelSpec& kspec,
                                         const std::vector<Eigen::VectorXd>& noise,
                                         const Eigen::VectorXd& diff) {
  const int N = static_cast<int>(noise.size());
  if (N < 1)
    throw std::invalid_argument("empirical_smoothing_kernel: N >= 1 required");
  const int D = kspec.ambient_dim;
  if (diff.size() != D || noise.front().size() != D)
    throw std::invalid_argument("empirical_smoothing_kernel: dimension mismatch");
  // Diagonal pairs contribute K(diff) each; off-diagonal ordered pairs come
  // in (delta, -delta) couples.
  double sum = static_cast<double>(N) * kernel_eval(kspec, diff);
  if (D == 1) {
    const double d = diff(0);
    for (int a = 0; a < N; ++a) {
      const double ea = noise[a](0);
      for (int b = a + 1; b < N; ++b) {
        const double delta = ea - noise[b](0);
        sum += kernel_eval(kspec, d + delta) + kernel_eval(kspec, d - delta);
      }
    }
  } else {
    Eigen::VectorXd plus(D), minus(D);
    for (int a = 0; a < N; ++a)
      for (int b = a + 1; b < N; ++b) {
        plus = diff + noise[a] - noise[b];
        minus = diff - noise[a] + noise[b];
        sum += kernel_eval(kspec, plus) + kernel_eval(kspec, minus);
      }
  }
  return sum / (static_cast<double>(N) * static_cast<double>(N));
}

inline double empirical_smoothing_kernel(const KernelSpec& kspec,
                                         const std::vector<Eigen::VectorXd>& noise,
                                         double diff) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(kspec.ambient_dim);
  d(0) = diff;
  return empirical_smoothing_kernel(kspec, noise, d);
}

namespace detail {

// Quadrature view of the empirical smoothing kernel (D = 1, closed-form
// spectrum): K_S(x) ~= sum_q weight_q cos(omega_q x), weight_q >= 0.
struct EmpiricalCfTable {
  Eigen::ArrayXd omega;
  Eigen::ArrayXd weight;

  bool empty() const { return omega.size() == 0; }

  double eval(double x) const {
    return (weight * (omega * x).cos()).sum();
  }
};

// x_max: largest |difference| the table will be asked to evaluate; it sets
// the panel length together with the noise spread. tol: absolute truncation
// plus quadrature budget for one evaluation.
inline EmpiricalCfTable build_empirical_cf_table(const KernelSpec& kspec,
                                                 const Eigen::ArrayXd& eps,
                                                 double x_max, double tol) {
  if (kspec.ambient_dim != 1 || !has_closed_spectrum(kspec))
    throw std::invalid_argument(
        "build_empirical_cf_table: needs D = 1 and a closed-form spectrum");
  if (eps.size() < 1)
    throw std::invalid_argument("build_empirical_cf_table: empty noise list");

  double W = std::max(4.0 / std::max(spectral_scale_1d(kspec), 1e-12), 8.0);
  while (kInvSqrtTau2 * spectral_tail_mass_1d(kspec, W) > 0.5 * tol) {
    W *= 1.4142135623730951;
    if (W > 1e12)
      throw std::runtime_error(
          "build_empirical_cf_table: spectral tail too heavy for tol");
  }

  const double delta_max = 2.0 * eps.abs().maxCoeff();
  const double f_max = std::max(std::abs(x_max), 1e-6) + delta_max;
  const double L = std::min(4.0 / f_max, W / 8.0);
  const long panels = static_cast<long>(std::ceil(W / L));
  if (panels * 16 > 3000000)
    throw std::runtime_error(
        "build_empirical_cf_table: node count exploded (W=" +
        std::to_string(W) + ", panels=" + std::to_string(panels) + ")");

  const QuadRule& rule = gauss_legendre_cached(16);
  const long Q = panels * 16;
  EmpiricalCfTable table;
  table.omega.resize(Q);
  table.weight.resize(Q);
  const double inv_n = 1.0 / static_cast<double>(eps.size());
  Eigen::VectorXd wvec(1);
  for (long p = 0; p < panels; ++p) {
    const double lo = static_cast<double>(p) * L;
    const double hi = std::min(W, lo + L);
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (int i = 0; i < 16; ++i) {
      const long q = p * 16 + i;
      const double w = mid + half * rule.nodes[i];
      const double re = (w * eps).cos().sum() * inv_n;
      const double im = (w * eps).sin().sum() * inv_n;
      wvec(0) = w;
      table.omega(q) = w;
      table.weight(q) = kInvSqrtTau2 * half * rule.weights[i] *
                        spectral_density(kspec, wvec) * (re * re + im * im);
    }
  }
  return table;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Expected smoothing kernel.

enum class ExpectedKernelRoute { Auto, ClosedForm, Quadrature, TensorFactor, MonteCarlo };

struct ExpectedKernelOptions {
  double tol = 1e-9;       // absolute target for closed-form/quadrature routes
  long mc_draws = 100000;  // paired draws for the Monte Carlo fallback
  uint64_t mc_seed = 0x5851f42d4c957f2dULL;
  ExpectedKernelRoute route = ExpectedKernelRoute::Auto;
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long draws = 0;
};

// Monte Carlo fallback: mean of K(diff + eps - eps') over paired draws.
inline McEstimate expected_smoothing_kernel_mc(const KernelSpec& kspec,
                                               const NoiseSpec& nspec,
                                               const Eigen::VectorXd& diff,
                                               long draws, uint64_t seed) {
  if (draws < 2)
    throw std::invalid_argument("expected_smoothing_kernel_mc: draws >= 2");
  Rng rng(seed);
  double sum = 0.0, sumsq = 0.0;
  Eigen::VectorXd arg(kspec.ambient_dim);
  const long chunk = 8192;
  long done = 0;
  while (done < draws) {
    const int m = static_cast<int>(std::min(chunk, draws - done));
    auto e1 = sample(nspec, m, rng);
    auto e2 = sample(nspec, m, rng);
    for (int i = 0; i < m; ++i) {
      arg = diff + e1[i] - e2[i];
      const double v = kernel_eval(kspec, arg);
      sum += v;
      sumsq += v * v;
    }
    done += m;
  }
  McEstimate est;
  est.draws = draws;
  est.value = sum / static_cast<double>(draws);
  const double var =
      std::max(0.0, sumsq / static_cast<double>(draws) - est.value * est.value);
  est.std_error = std::sqrt(var / static_cast<double>(draws));
  return est;
}

namespace detail {

inline double gaussian_gaussian_expected(const KernelSpec& k, const NoiseSpec& n,
                                         const Eigen::VectorXd& diff) {
  // Convolving with two independent N(0, sigma_n^2 I) draws turns the width
  // parameter sigma^2 into sigma^2 + sigma_n^2 and scales the amplitude.
  const double s2 = k.phi * k.phi;
  const double t2 = s2 + n.sigma_n * n.sigma_n;
  return k.variance * std::pow(s2 / t2, 0.5 * k.ambient_dim) *
         std::exp(-diff.squaredNorm() / (4.0 * t2));
}

inline double expected_kernel_quadrature_1d(const KernelSpec& kspec,
                                            const NoiseSpec& nspec, double d,
                                            double tol) {
  double W = std::max(4.0 / std::max(spectral_scale_1d(kspec), 1e-12), 8.0);
  while (kInvSqrtTau2 * spectral_tail_mass_1d(kspec, W) *
             cf_sq_upper_1d(nspec, W) > 0.25 * tol) {
    W *= 1.4142135623730951;
    if (W > 1e12)
      throw std::runtime_error(
          "expected_smoothing_kernel: spectral tail too heavy for tol");
  }
  Eigen::VectorXd wvec(1);
  auto f = [&](double w) {
    wvec(0) = w;
    const double cf = characteristic_fn(nspec, w);
    return spectral_density(kspec, wvec) * cf * cf * std::cos(w * d);
  };
  auto res = integrate_adaptive(f, 0.0, W, 0.5 * tol, 60000);
  return kInvSqrtTau2 * res.value;
}

inline bool tensor_route_applies(const KernelSpec& k, const NoiseSpec& n) {
  return k.family == KernelFamily::TensorProduct &&
         (n.law == NoiseLaw::Gaussian ||
          n.law == NoiseLaw::TensorGeneralizedLaplace);
}

}  // namespace detail

inline double expected_smoothing_kernel(const KernelSpec& kspec,
                                        const NoiseSpec& nspec,
                                        const Eigen::VectorXd& diff,
                                        const ExpectedKernelOptions& opts = {}) {
  const int D = kspec.ambient_dim;
  if (nspec.ambient_dim != D || diff.size() != D)
    throw std::invalid_argument("expected_smoothing_kernel: dimension mismatch");
  if (nspec.is_degenerate()) return kernel_eval(kspec, diff);

  ExpectedKernelRoute route = opts.route;
  if (route == ExpectedKernelRoute::Auto) {
    if (kspec.family == KernelFamily::Gaussian && nspec.law == NoiseLaw::Gaussian)
      route = ExpectedKernelRoute::ClosedForm;
    else if (detail::tensor_route_applies(kspec, nspec))
      route = ExpectedKernelRoute::TensorFactor;
    else if (D == 1 && detail::has_closed_spectrum(kspec))
      route = ExpectedKernelRoute::Quadrature;
    else
      route = ExpectedKernelRoute::MonteCarlo;
  }

  switch (route) {
    case ExpectedKernelRoute::ClosedForm:
      if (kspec.family != KernelFamily::Gaussian ||
          nspec.law != NoiseLaw::Gaussian)
        throw std::invalid_argument(
            "expected_smoothing_kernel: closed form needs Gaussian kernel + "
            "Gaussian noise");
      return detail::gaussian_gaussian_expected(kspec, nspec, diff);
    case ExpectedKernelRoute::Quadrature:
      if (D != 1 || !detail::has_closed_spectrum(kspec))
        throw std::invalid_argument(
            "expected_smoothing_kernel: quadrature route needs D = 1 and a "
            "closed-form spectrum");
      return detail::expected_kernel_quadrature_1d(kspec, nspec, diff(0),
                                                   opts.tol);
    case ExpectedKernelRoute::TensorFactor: {
      if (!detail::tensor_route_applies(kspec, nspec))
        throw std::invalid_argument(
            "expected_smoothing_kernel: tensor route needs a tensor kernel "
            "with per-coordinate noise");
      double prod = 1.0;
      Eigen::VectorXd dj(1);
      for (size_t j = 0; j < kspec.factors.size(); ++j) {
        const NoiseSpec fn =
            nspec.law == NoiseLaw::Gaussian
                ? NoiseSpec::gaussian(nspec.sigma_n, 1)
                : NoiseSpec::generalized_laplace(nspec.sigma_n, nspec.m_eps, 1);
        dj(0) = diff(static_cast<int>(j));
        ExpectedKernelOptions fo = opts;
        fo.route = ExpectedKernelRoute::Auto;
        fo.mc_seed = derive_seed(opts.mc_seed, j + 1);
        prod *= expected_smoothing_kernel(kspec.factors[j], fn, dj, fo);
      }
      return prod;
    }
    case ExpectedKernelRoute::MonteCarlo:
      return expected_smoothing_kernel_mc(kspec, nspec, diff, opts.mc_draws,
                                          opts.mc_seed)
          .value;
    case ExpectedKernelRoute::Auto:
      break;
  }
  throw std::logic_error("expected_smoothing_kernel: unreachable");
}

inline double expected_smoothing_kernel(const KernelSpec& kspec,
                                        const NoiseSpec& nspec, double diff,
                                        const ExpectedKernelOptions& opts = {}) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(kspec.ambient_dim);
  d(0) = diff;
  return expected_smoothing_kernel(kspec, nspec, d, opts);
}

// ---------------------------------------------------------------------------
// Gram construction.

struct GramOptions {
  double tol = 1e-8;        // fast-path absolute accuracy per entry
  bool force_direct = false;
  double x_max_hint = 0.0;  // largest |difference| later evals may ask for
};

struct SmoothedGram {
  Eigen::MatrixXd points;  // n x D
  KernelSpec kernel;
  NoiseSpec noise;
  std::vector<Eigen::VectorXd> noise_used;
  Eigen::MatrixXd gram;
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // column j pairs with eigenvalues(j)
  double separation = 0.0;       // q_X
  detail::EmpiricalCfTable cf_table;

  int n() const { return static_cast<int>(gram.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  int noise_count() const { return static_cast<int>(noise_used.size()); }
  bool uses_cf_table() const { return !cf_table.empty(); }

  // K_S at an arbitrary difference, reusing the shared noise list (and the
  // same quadrature table when the Gram was built through it).
  double ks_at(const Eigen::VectorXd& diff) const {
    if (uses_cf_table()) return cf_table.eval(diff(0));
    if (noise.is_degenerate() || noise_count() == 1)
      return kernel_eval(kernel, diff);
    return empirical_smoothing_kernel(kernel, noise_used, diff);
  }

  double ks_at(double diff) const {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dim());
    d(0) = diff;
    return ks_at(d);
  }
};

inline SmoothedGram build_gram(const KernelSpec& kspec, const NoiseSpec& nspec,
                               int N, const Eigen::MatrixXd& points, Rng& rng,
                               const GramOptions& opts = {}) {
  const int n = static_cast<int>(points.rows());
  const int D = kspec.ambient_dim;
  if (n < 1) throw std::invalid_argument("build_gram: n >= 1 points required");
  if (points.cols() != D || nspec.ambient_dim != D)
    throw std::invalid_argument("build_gram: dimension mismatch");
  if (N < 1) throw std::invalid_argument("build_gram: N >= 1 required");

  SmoothedGram g;
  g.points = points;
  g.kernel = kspec;
  g.noise = nspec;
  g.separation = separation_distance(points);
  if (g.separation == 0.0)
    throw std::invalid_argument(
        "build_gram: duplicate design points (separation distance q_X = 0)");
  g.noise_used = sample(nspec, N, rng);
  g.gram.resize(n, n);

  double max_dist = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      max_dist = std::max(max_dist, (points.row(i) - points.row(j)).norm());

  const bool degenerate = nspec.is_degenerate() || N == 1;
  const bool fast = !opts.force_direct && !degenerate && D == 1 &&
                    detail::has_closed_spectrum(kspec) && N >= 2;
  if (fast) {
    Eigen::ArrayXd eps(N);
    for (int k = 0; k < N; ++k) eps(k) = g.noise_used[k](0);
    const double x_max =
        std::max(opts.x_max_hint, 1.5 * max_dist + 1.0);
    g.cf_table = detail::build_empirical_cf_table(kspec, eps, x_max, opts.tol);
    for (int i = 0; i < n; ++i) {
      g.gram(i, i) = g.cf_table.eval(0.0);
      for (int j = i + 1; j < n; ++j) {
        const double v = g.cf_table.eval(points(i, 0) - points(j, 0));
        g.gram(i, j) = v;
        g.gram(j, i) = v;
      }
    }
  } else {
    Eigen::VectorXd diff(D);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        diff = (points.row(i) - points.row(j)).transpose();
        const double v = degenerate
                             ? kernel_eval(kspec, diff)
                             : empirical_smoothing_kernel(kspec, g.noise_used,
                                                          diff);
        g.gram(i, j) = v;
        g.gram(j, i) = v;
      }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.gram);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("build_gram: eigendecomposition failed");
  g.eigenvalues = es.eigenvalues().reverse();
  g.eigenvectors = es.eigenvectors().rowwise().reverse();
  return g;
}

// Gram of the expected smoothing kernel (population version of build_gram).
inline Eigen::MatrixXd build_expected_gram(const KernelSpec& kspec,
                                           const NoiseSpec& nspec,
                                           const Eigen::MatrixXd& points,
                                           const ExpectedKernelOptions& opts = {}) {
  const int n = static_cast<int>(points.rows());
  if (n < 1 || points.cols() != kspec.ambient_dim)
    throw std::invalid_argument("build_expected_gram: bad points");
  Eigen::MatrixXd K(n, n);
  Eigen::VectorXd diff(kspec.ambient_dim);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      diff = (points.row(i) - points.row(j)).transpose();
      const double v = expected_smoothing_kernel(kspec, nspec, diff, opts);
      K(i, j) = v;
      K(j, i) = v;
    }
  return K;
}

// ---------------------------------------------------------------------------
// Augmentation-error probe: sup over a difference grid of |K~_S - K_S|.

struct SupGapRow {
  int N = 0;
  double mean_sup_gap = 0.0;
};

inline std::vector<SupGapRow> sup_gap_estimate(
    const KernelSpec& kspec, const NoiseSpec& nspec,
    const std::vector<int>& N_grid, const std::vector<Eigen::VectorXd>& diff_grid,
    int reps, Rng& rng, double tol = 1e-8) {
  if (N_grid.empty() || diff_grid.empty() || reps < 1)
    throw std::invalid_argument("sup_gap_estimate: empty grid or reps < 1");
  std::vector<SupGapRow> rows;
  rows.reserve(N_grid.size());
  if (nspec.is_degenerate()) {
    for (int N : N_grid) rows.push_back({N, 0.0});
    return rows;
  }

  ExpectedKernelOptions eopts;
  eopts.tol = 0.01 * tol;
  std::vector<double> expected(diff_grid.size());
  for (size_t i = 0; i < diff_grid.size(); ++i)
    expected[i] = expected_smoothing_kernel(kspec, nspec, diff_grid[i], eopts);

  const bool fast = kspec.ambient_dim == 1 && detail::has_closed_spectrum(kspec);
  double x_max = 0.0;
  for (const auto& d : diff_grid) x_max = std::max(x_max, std::abs(d(0)));

  for (int N : N_grid) {
    double acc = 0.0;
    for (int r = 0; r < reps; ++r) {
      auto noise = sample(nspec, N, rng);
      double sup = 0.0;
      if (fast && N >= 2) {
        Eigen::ArrayXd eps(N);
        for (int k = 0; k < N; ++k) eps(k) = noise[k](0);
        auto table = detail::build_empirical_cf_table(kspec, eps, x_max, tol);
        for (size_t i = 0; i < diff_grid.size(); ++i)
          sup = std::max(sup,
                         std::abs(expected[i] - table.eval(diff_grid[i](0))));
      } else {
        for (size_t i = 0; i < diff_grid.size(); ++i)
          sup = std::max(
              sup, std::abs(expected[i] - empirical_smoothing_kernel(
                                              kspec, noise, diff_grid[i])));
      }
      acc += sup;
    }
    rows.push_back({N, acc / static_cast<double>(reps)});
  }
  return rows;
}

inline std::vector<SupGapRow> sup_gap_estimate(const KernelSpec& kspec,
                                               const NoiseSpec& nspec,
                                               const std::vector<int>& N_grid,
                                               const std::vector<double>& diff_grid,
                                               int reps, Rng& rng,
                                               double tol = 1e-8) {
  std::vector<Eigen::VectorXd> grid;
  grid.reserve(diff_grid.size());
  for (double d : diff_grid) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(kspec.ambient_dim);
    v(0) = d;
    grid.push_back(v);
  }
  return sup_gap_estimate(kspec, nspec, N_grid, grid, reps, rng, tol);
}

// ---------------------------------------------------------------------------
// Debug dumps (row-major, full precision).

inline void dump_gram_csv(const Eigen::MatrixXd& gram, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("dump_gram_csv: cannot open " + path);
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.cols(); ++j) {
      if (j) out << ',';
      out << gram(i, j);
    }
    out << '\n';
  }
}

inline void dump_gram_binary(const Eigen::MatrixXd& gram,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("dump_gram_binary: cannot open " + path);
  const int64_t n = gram.rows(), m = gram.cols();
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&m), sizeof(m));
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < m; ++j) {
      const double v = gram(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
}

}  // namespace rsk
