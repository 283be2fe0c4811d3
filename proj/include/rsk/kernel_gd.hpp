#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rsk/smoothing.hpp"

// Kernel gradient descent in the eigenbasis of a smoothed Gram matrix.
// The recursion theta_{t+1} = theta_t - beta (K theta_t - sqrt(K) y)
// - alpha theta_t has the per-eigenvalue closed forms
//   alpha  = 0 : f_t = (1 - (1 - beta eta)^t) (v'y) v
//   alpha  > 0 : f_t = [beta eta / (alpha + beta eta)]
//                      (1 - (1 - alpha - beta eta)^t) (v'y) v
// both obtained by unrolling from f_0 = 0. Convergence needs
// beta eta_1 + alpha < 1, which gd_fit validates against the Gram.
//
// Weights are recovered through a thresholded pseudo-inverse
// (cut at 1e-12 eta_1): shared-noise Grams can be numerically
// rank-deficient. loss_trajectory holds the training loss
// (1/2n)||y - f_t(X)||^2 per iteration in Iterative mode and at the
// evaluated checkpoints otherwise.

namespace rsk {

enum class FitMode { Iterative, ClosedForm };

struct StopRule {
  enum class Kind { FixedT, ValidationEarlyStop };
  Kind kind = Kind::FixedT;
  long t = 0;             // FixedT
  int check_every = 200;  // ValidationEarlyStop
  int patience = std::numeric_limits<int>::max();

  static StopRule fixed(long t_steps) {
    StopRule s;
    s.kind = Kind::FixedT;
    s.t = t_steps;
    return s;
  }
  static StopRule validation(int check_every = 200,
                             int patience = std::numeric_limits<int>::max()) {
    StopRule s;
    s.kind = Kind::ValidationEarlyStop;
    s.check_every = check_every;
    s.patience = patience;
    return s;
  }
};

struct TrainConfig {
  double beta = 0.1;
  double alpha = 0.0;  // 0 = no weight decay
  long t_max = 100000;
  StopRule stop = StopRule::fixed(1000);
  int N = 0;  // augmentation count used to build the Gram (bookkeeping)
  FitMode mode = FitMode::ClosedForm;
  Eigen::MatrixXd val_points;  // required by ValidationEarlyStop
  Eigen::VectorXd val_y;

  void validate_against(const SmoothedGram& gram) const {
    if (!(beta > 0.0)) throw std::invalid_argument("TrainConfig: beta > 0");
    if (!(alpha >= 0.0)) throw std::invalid_argument("TrainConfig: alpha >= 0");
    if (t_max < 0) throw std::invalid_argument("TrainConfig: t_max >= 0");
    const double eta1 = std::max(gram.eigenvalues(0), 0.0);
    if (!(beta * eta1 + alpha < 1.0))
      throw std::invalid_argument(
          "TrainConfig: step size too large, beta*eta1 + alpha must be < 1 "
          "(got " +
          std::to_string(beta * eta1 + alpha) + ")");
    if (stop.kind == StopRule::Kind::FixedT && (stop.t < 0 || stop.t > t_max))
      throw std::invalid_argument("TrainConfig: FixedT needs 0 <= t <= t_max");
    if (stop.kind == StopRule::Kind::ValidationEarlyStop) {
      if (stop.check_every < 1)
        throw std::invalid_argument("TrainConfig: check_every >= 1");
      if (stop.patience < 1)
        throw std::invalid_argument("TrainConfig: patience >= 1");
      if (val_points.rows() == 0 || val_y.size() != val_points.rows())
        throw std::invalid_argument(
            "TrainConfig: ValidationEarlyStop needs a validation set");
    }
  }
};

struct FitResult {
  Eigen::VectorXd w;              // representer weights
  Eigen::VectorXd theta;          // sqrt(K) w
  long t_used = 0;
  std::vector<double> loss_trajectory;
  Eigen::VectorXd fitted_values;  // f_t(X)
  int truncated_modes = 0;        // eigenvalues below the pseudo-inverse cut
};

namespace detail {

// Per-eigenvalue fitted-value coefficient after t steps.
inline double gd_coef(double eta, double beta, double alpha, long t) {
  if (t <= 0) return 0.0;
  const double be = beta * std::max(eta, 0.0);
  if (alpha == 0.0) return 1.0 - std::pow(1.0 - be, static_cast<double>(t));
  if (be == 0.0) return 0.0;
  return be / (alpha + be) *
         (1.0 - std::pow(1.0 - alpha - be, static_cast<double>(t)));
}

struct EigenWorkspace {
  Eigen::VectorXd z;       // V' y
  Eigen::VectorXd eta;     // clamped eigenvalues
  double eta1 = 0.0;
  double cut = 0.0;        // pseudo-inverse threshold
  int truncated = 0;
};

inline EigenWorkspace make_workspace(const SmoothedGram& gram,
                                     const Eigen::VectorXd& y) {
  if (y.size() != gram.n())
    throw std::invalid_argument("gd_fit: y size does not match the Gram");
  EigenWorkspace ws;
  ws.z = gram.eigenvectors.transpose() * y;
  ws.eta = gram.eigenvalues.cwiseMax(0.0);
  ws.eta1 = ws.eta(0);
  ws.cut = 1e-12 * ws.eta1;
  for (int j = 0; j < ws.eta.size(); ++j)
    if (ws.eta(j) <= ws.cut) ++ws.truncated;
  return ws;
}

// fitted values, weights and theta for given per-mode coefficients
inline void assemble(const SmoothedGram& gram, const EigenWorkspace& ws,
                     const Eigen::VectorXd& coef, FitResult* out) {
  const int n = gram.n();
  Eigen::VectorXd fc = coef.cwiseProduct(ws.z);
  Eigen::VectorXd wc(n), tc(n);
  for (int j = 0; j < n; ++j) {
    if (ws.eta(j) > ws.cut) {
      wc(j) = fc(j) / ws.eta(j);
      tc(j) = fc(j) / std::sqrt(ws.eta(j));
    } else {
      wc(j) = 0.0;
      tc(j) = 0.0;
    }
  }
  out->fitted_values = gram.eigenvectors * fc;
  out->w = gram.eigenvectors * wc;
  out->theta = gram.eigenvectors * tc;
  out->truncated_modes = ws.truncated;
}

inline double train_loss(const Eigen::VectorXd& fitted,
                         const Eigen::VectorXd& y) {
  return 0.5 * (y - fitted).squaredNorm() / static_cast<double>(y.size());
}

}  // namespace detail

// Mean-squared-error style validation loss used by early stopping.
inline double holdout_loss(const Eigen::VectorXd& predictions,
                           const Eigen::VectorXd& y) {
  return 0.5 * (y - predictions).squaredNorm() / static_cast<double>(y.size());
}

inline double predict(const SmoothedGram& gram, const FitResult& fit,
                      const Eigen::VectorXd& x_new);
inline Eigen::VectorXd predict(const SmoothedGram& gram, const FitResult& fit,
                               const Eigen::MatrixXd& X_new);

namespace detail {

// Kernel vector k(x) evaluated with the Gram's shared noise list.
inline Eigen::VectorXd kernel_vector(const SmoothedGram& gram,
                                     const Eigen::VectorXd& x_new) {
  const int n = gram.n();
  Eigen::VectorXd k(n);
  Eigen::VectorXd diff(gram.dim());
  for (int j = 0; j < n; ++j) {
    diff = x_new - gram.points.row(j).transpose();
    k(j) = gram.ks_at(diff);
  }
  return k;
}

inline Eigen::MatrixXd kernel_matrix(const SmoothedGram& gram,
                                     const Eigen::MatrixXd& X_new) {
  Eigen::MatrixXd K(X_new.rows(), gram.n());
  for (Eigen::Index i = 0; i < X_new.rows(); ++i)
    K.row(i) = kernel_vector(gram, X_new.row(i).transpose()).transpose();
  return K;
}

}  // namespace detail

inline FitResult gd_fit(const SmoothedGram& gram, const Eigen::VectorXd& y,
                        const TrainConfig& cfg) {
  cfg.validate_against(gram);
  const int n = gram.n();
  auto ws = detail::make_workspace(gram, y);
  FitResult fit;

  const bool early = cfg.stop.kind == StopRule::Kind::ValidationEarlyStop;
  Eigen::MatrixXd val_K;
  if (early) val_K = detail::kernel_matrix(gram, cfg.val_points);

  auto coef_at = [&](long t) {
    Eigen::VectorXd coef(n);
    for (int j = 0; j < n; ++j)
      coef(j) = detail::gd_coef(ws.eta(j), cfg.beta, cfg.alpha, t);
    return coef;
  };
  auto val_loss_of = [&](const FitResult& f) {
    return holdout_loss(val_K * f.w, cfg.val_y);
  };

  if (cfg.mode == FitMode::ClosedForm) {
    if (!early) {
      fit.t_used = cfg.stop.t;
      detail::assemble(gram, ws, coef_at(fit.t_used), &fit);
      fit.loss_trajectory = {detail::train_loss(fit.fitted_values, y)};
      return fit;
    }
    FitResult best;
    double best_loss = std::numeric_limits<double>::infinity();
    int bad_checks = 0;
    for (long t = cfg.stop.check_every; t <= cfg.t_max;
         t += cfg.stop.check_every) {
      FitResult cand;
      cand.t_used = t;
      detail::assemble(gram, ws, coef_at(t), &cand);
      cand.loss_trajectory = {detail::train_loss(cand.fitted_values, y)};
      fit.loss_trajectory.push_back(cand.loss_trajectory.back());
      const double vl = val_loss_of(cand);
      if (vl < best_loss) {
        best_loss = vl;
        best = cand;
        bad_checks = 0;
      } else if (++bad_checks >= cfg.stop.patience) {
        break;
      }
    }
    if (!std::isfinite(best_loss)) {
      // t_max < check_every: nothing evaluated, return the t = 0 model
      detail::assemble(gram, ws, coef_at(0), &best);
      best.t_used = 0;
    }
    best.loss_trajectory = std::move(fit.loss_trajectory);
    return best;
  }

  // Iterative mode: run the theta recursion explicitly.
  const long t_target = early ? cfg.t_max : cfg.stop.t;
  Eigen::VectorXd sqrt_eta = ws.eta.cwiseSqrt();
  Eigen::VectorXd sqrtKy =
      gram.eigenvectors * sqrt_eta.cwiseProduct(ws.z).eval();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd sqrtK = gram.eigenvectors * sqrt_eta.asDiagonal() *
                          gram.eigenvectors.transpose();

  auto snapshot = [&](long t) {
    // closed-form assembly at the same t keeps w/theta/fitted consistent
    FitResult f;
    f.t_used = t;
    detail::assemble(gram, ws, coef_at(t), &f);
    return f;
  };

  FitResult best;
  double best_loss = std::numeric_limits<double>::infinity();
  long best_t = 0;
  int bad_checks = 0;
  bool stopped = false;
  fit.loss_trajectory.reserve(static_cast<size_t>(std::min(t_target, 100000L)) + 1);
  fit.loss_trajectory.push_back(detail::train_loss(sqrtK * theta, y));
  for (long t = 1; t <= t_target; ++t) {
    theta = theta - cfg.beta * (gram.gram * theta - sqrtKy) - cfg.alpha * theta;
    fit.loss_trajectory.push_back(detail::train_loss(sqrtK * theta, y));
    if (early && t % cfg.stop.check_every == 0) {
      FitResult cand = snapshot(t);
      const double vl = val_loss_of(cand);
      if (vl < best_loss) {
        best_loss = vl;
        best_t = t;
        bad_checks = 0;
      } else if (++bad_checks >= cfg.stop.patience) {
        stopped = true;
        break;
      }
    }
  }
  if (early) {
    (void)stopped;
    best = snapshot(best_t);
    best.loss_trajectory = std::move(fit.loss_trajectory);
    return best;
  }
  fit.t_used = t_target;
  fit.fitted_values = sqrtK * theta;
  fit.theta = theta;
  Eigen::VectorXd fz = gram.eigenvectors.transpose() * fit.fitted_values;
  Eigen::VectorXd wc(n);
  for (int j = 0; j < n; ++j)
    wc(j) = ws.eta(j) > ws.cut ? fz(j) / ws.eta(j) : 0.0;
  fit.w = gram.eigenvectors * wc;
  fit.truncated_modes = ws.truncated;
  return fit;
}

inline FitResult krr_fit(const SmoothedGram& gram, const Eigen::VectorXd& y,
                         double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("krr_fit: lambda > 0");
  const int n = gram.n();
  auto ws = detail::make_workspace(gram, y);
  const double nl = static_cast<double>(n) * lambda;
  FitResult fit;
  Eigen::VectorXd coef(n), wc(n), tc(n);
  for (int j = 0; j < n; ++j) {
    coef(j) = ws.eta(j) / (ws.eta(j) + nl);
    wc(j) = ws.z(j) / (ws.eta(j) + nl);
    tc(j) = std::sqrt(ws.eta(j)) * wc(j);
  }
  fit.fitted_values = gram.eigenvectors * coef.cwiseProduct(ws.z).eval();
  fit.w = gram.eigenvectors * wc;
  fit.theta = gram.eigenvectors * tc;
  fit.t_used = 0;
  fit.truncated_modes = ws.truncated;
  fit.loss_trajectory = {detail::train_loss(fit.fitted_values, y)};
  return fit;
}

inline double predict(const SmoothedGram& gram, const FitResult& fit,
                      const Eigen::VectorXd& x_new) {
  return detail::kernel_vector(gram, x_new).dot(fit.w);
}

inline Eigen::VectorXd predict(const SmoothedGram& gram, const FitResult& fit,
                               const Eigen::MatrixXd& X_new) {
  return detail::kernel_matrix(gram, X_new) * fit.w;
}

// ---------------------------------------------------------------------------
// Early-stopping vs ridge comparison audit.

struct ComparisonAuditReport {
  double beta = 0.0;
  long t = 0;
  double n_lambda = 0.0;       // (beta t)^{-1}
  double max_slack_i = -std::numeric_limits<double>::infinity();
  double max_slack_ii = -std::numeric_limits<double>::infinity();
  double gt_norm2 = 0.0;       // ||g_t||_H^2
  double gtilde_norm2 = 0.0;   // ||g_ridge||_H^2
  double norm_slack = 0.0;     // gt_norm2 - 4 gtilde_norm2
  int violations = 0;
  bool ok = false;
};

// Slacks (lhs - rhs, <= 0 when the inequality holds) of the two scalar
// comparison bounds at one eigenvalue, with n lambda = 1/(beta t):
//   (i)  (1 - beta eta)^{2t} <= 2e (nl / (nl + eta))^2
//   (ii) (1 - (1 - beta eta)^t)^2 <= 4 (beta t eta / (1 + beta t eta))^2
inline std::pair<double, double> audit_eigenvalue(double eta, double beta,
                                                  long t) {
  if (!(beta > 0.0) || t < 1)
    throw std::invalid_argument("audit_eigenvalue: beta > 0 and t >= 1");
  eta = std::max(eta, 0.0);
  const double bt = beta * static_cast<double>(t);
  const double nl = 1.0 / bt;
  const double r = std::pow(1.0 - beta * eta, static_cast<double>(t));
  const double lhs_i = r * r;
  const double rhs_i = 2.0 * 2.718281828459045 * std::pow(nl / (nl + eta), 2);
  const double lhs_ii = (1.0 - r) * (1.0 - r);
  const double rhs_ii = 4.0 * std::pow(bt * eta / (1.0 + bt * eta), 2);
  return {lhs_i - rhs_i, lhs_ii - rhs_ii};
}

inline ComparisonAuditReport comparison_audit(const SmoothedGram& gram,
                                              const Eigen::VectorXd& y,
                                              double beta, long t) {
  const double eta1 = std::max(gram.eigenvalues(0), 0.0);
  if (!(beta > 0.0) || !(beta * eta1 < 1.0))
    throw std::invalid_argument("comparison_audit: needs 0 < beta*eta1 < 1");
  if (t < 1) throw std::invalid_argument("comparison_audit: t >= 1");
  auto ws = detail::make_workspace(gram, y);
  ComparisonAuditReport rep;
  rep.beta = beta;
  rep.t = t;
  rep.n_lambda = 1.0 / (beta * static_cast<double>(t));
  const double tol = 1e-12;
  for (int j = 0; j < gram.n(); ++j) {
    auto [s1, s2] = audit_eigenvalue(ws.eta(j), beta, t);
    rep.max_slack_i = std::max(rep.max_slack_i, s1);
    rep.max_slack_ii = std::max(rep.max_slack_ii, s2);
    if (s1 > tol || s2 > tol) ++rep.violations;
    const double eta = ws.eta(j);
    if (eta > ws.cut) {
      const double cg = detail::gd_coef(eta, beta, 0.0, t);
      const double cr = eta / (eta + rep.n_lambda);
      rep.gt_norm2 += cg * cg * ws.z(j) * ws.z(j) / eta;
      rep.gtilde_norm2 += cr * cr * ws.z(j) * ws.z(j) / eta;
    }
  }
  rep.norm_slack = rep.gt_norm2 - 4.0 * rep.gtilde_norm2;
  const bool norm_ok =
      rep.gt_norm2 <= 4.0 * rep.gtilde_norm2 * (1.0 + 1e-12) + 1e-300;
  rep.ok = rep.violations == 0 && norm_ok;
  return rep;
}

// ---------------------------------------------------------------------------
// Augmented-loss bookkeeping.

struct AugmentedLoss {
  double l_n = 0.0;       // loss of the averaged predictor
  double l_prime = 0.0;   // per-augmentation loss
  double gap = 0.0;       // l_prime - l_n, via the exact pairwise identity
};

// h_values(j, k) = h(x_j + eps_k).
inline AugmentedLoss augmented_loss(const Eigen::MatrixXd& h_values,
                                    const Eigen::VectorXd& y) {
  const int n = static_cast<int>(h_values.rows());
  const int N = static_cast<int>(h_values.cols());
  if (n < 1 || N < 1 || y.size() != n)
    throw std::invalid_argument("augmented_loss: shape mismatch");
  AugmentedLoss out;
  for (int j = 0; j < n; ++j) {
    const double hbar = h_values.row(j).mean();
    out.l_n += (y(j) - hbar) * (y(j) - hbar);
    double per = 0.0, pair = 0.0;
    for (int k = 0; k < N; ++k) {
      const double r = y(j) - h_values(j, k);
      per += r * r;
      for (int l = k + 1; l < N; ++l) {
        const double d = h_values(j, k) - h_values(j, l);
        pair += 2.0 * d * d;  // ordered pairs (k,l) and (l,k)
      }
    }
    out.l_prime += per / N;
    out.gap += pair / (2.0 * N * N);
  }
  const double s = 0.5 / n;
  out.l_n *= s;
  out.l_prime *= s;
  out.gap *= s;
  return out;
}

// Evaluates h at every x_j + eps_k of the Gram's shared noise list.
template <typename H>
AugmentedLoss augmented_loss(const SmoothedGram& gram, const Eigen::VectorXd& y,
                             H&& h) {
  const int n = gram.n();
  const int N = gram.noise_count();
  Eigen::MatrixXd hv(n, N);
  Eigen::VectorXd x(gram.dim());
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < N; ++k) {
      x = gram.points.row(j).transpose() + gram.noise_used[k];
      hv(j, k) = h(x);
    }
  return augmented_loss(hv, y);
}

}  // namespace rsk
