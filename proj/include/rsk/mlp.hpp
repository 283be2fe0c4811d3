#pragma once

// Two-hidden-layer ReLU network trained by minibatch SGD with momentum on
// the per-augmentation squared loss. The smoothed predictor averages the
// network over a fixed bank of noise draws; training estimates that average
// per batch element by a small subsample of the bank, which is unbiased for
// the per-augmentation loss.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rsk/noise.hpp"
#include "rsk/rng.hpp"

namespace rsk {

struct MlpModel {
  Eigen::MatrixXd W1;  // h1 x D
  Eigen::VectorXd b1;  // h1
  Eigen::MatrixXd W2;  // h2 x h1
  Eigen::VectorXd b2;  // h2
  Eigen::VectorXd w3;  // h2
  double b3 = 0;

  int input_dim() const { return static_cast<int>(W1.cols()); }
  int hidden1() const { return static_cast<int>(W1.rows()); }
  int hidden2() const { return static_cast<int>(W2.rows()); }

  // Kaiming fan-in init: weights N(0, 2/fan_in), biases zero.
  static MlpModel kaiming(int D, int h1, int h2, Rng& rng) {
    if (D < 1 || h1 < 1 || h2 < 1)
      throw std::invalid_argument("mlp: layer widths must be positive");
    MlpModel m;
    const double s1 = std::sqrt(2.0 / D);
    const double s2 = std::sqrt(2.0 / h1);
    const double s3 = std::sqrt(2.0 / h2);
    m.W1.resize(h1, D);
    for (int i = 0; i < h1; ++i)
      for (int j = 0; j < D; ++j) m.W1(i, j) = s1 * rng.normal();
    m.W2.resize(h2, h1);
    for (int i = 0; i < h2; ++i)
      for (int j = 0; j < h1; ++j) m.W2(i, j) = s2 * rng.normal();
    m.w3.resize(h2);
    for (int i = 0; i < h2; ++i) m.w3(i) = s3 * rng.normal();
    m.b1 = Eigen::VectorXd::Zero(h1);
    m.b2 = Eigen::VectorXd::Zero(h2);
    m.b3 = 0;
    return m;
  }

  static MlpModel zeros(int D, int h1, int h2) {
    MlpModel m;
    m.W1 = Eigen::MatrixXd::Zero(h1, D);
    m.W2 = Eigen::MatrixXd::Zero(h2, h1);
    m.b1 = Eigen::VectorXd::Zero(h1);
    m.b2 = Eigen::VectorXd::Zero(h2);
    m.w3 = Eigen::VectorXd::Zero(h2);
    m.b3 = 0;
    return m;
  }
};

namespace detail {

struct MlpActivations {
  Eigen::MatrixXd z1, a1, z2, a2;  // h x M
  Eigen::RowVectorXd out;          // 1 x M
};

// Batched forward over M column inputs (D x M).
inline void mlp_forward_cols(const MlpModel& m, const Eigen::MatrixXd& xc,
                             MlpActivations& act) {
  act.z1 = (m.W1 * xc).colwise() + m.b1;
  act.a1 = act.z1.cwiseMax(0.0);
  act.z2 = (m.W2 * act.a1).colwise() + m.b2;
  act.a2 = act.z2.cwiseMax(0.0);
  act.out = (m.w3.transpose() * act.a2).array() + m.b3;
}

}  // namespace detail

inline double mlp_forward(const MlpModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.input_dim())
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  detail::MlpActivations act;
  detail::mlp_forward_cols(m, x, act);
  return act.out(0);
}

// Rows of X are inputs.
inline Eigen::VectorXd mlp_forward(const MlpModel& m,
                                   const Eigen::MatrixXd& X) {
  if (X.cols() != m.input_dim())
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  detail::MlpActivations act;
  detail::mlp_forward_cols(m, X.transpose(), act);
  return act.out.transpose();
}

struct MlpGrads {
  Eigen::MatrixXd W1, W2;
  Eigen::VectorXd b1, b2, w3;
  double b3 = 0;

  static MlpGrads zeros_like(const MlpModel& m) {
    MlpGrads g;
    g.W1 = Eigen::MatrixXd::Zero(m.W1.rows(), m.W1.cols());
    g.W2 = Eigen::MatrixXd::Zero(m.W2.rows(), m.W2.cols());
    g.b1 = Eigen::VectorXd::Zero(m.b1.size());
    g.b2 = Eigen::VectorXd::Zero(m.b2.size());
    g.w3 = Eigen::VectorXd::Zero(m.w3.size());
    g.b3 = 0;
    return g;
  }
};

// Mean over columns of (1/2)(h(x) - y)^2; gradients of that mean.
inline double mlp_loss_grad(const MlpModel& m, const Eigen::MatrixXd& xc,
                            const Eigen::VectorXd& y, MlpGrads& g) {
  const auto M = xc.cols();
  if (y.size() != M)
    throw std::invalid_argument("mlp_loss_grad: target count mismatch");
  detail::MlpActivations act;
  detail::mlp_forward_cols(m, xc, act);
  const Eigen::RowVectorXd diff = act.out - y.transpose();
  const double loss = 0.5 * diff.squaredNorm() / static_cast<double>(M);

  const Eigen::RowVectorXd d = diff / static_cast<double>(M);
  g.w3.noalias() = act.a2 * d.transpose();
  g.b3 = d.sum();
  Eigen::MatrixXd dz2 =
      (m.w3 * d).cwiseProduct((act.z2.array() > 0.0).cast<double>().matrix());
  g.W2.noalias() = dz2 * act.a1.transpose();
  g.b2 = dz2.rowwise().sum();
  Eigen::MatrixXd dz1 = (m.W2.transpose() * dz2)
                            .cwiseProduct(
                                (act.z1.array() > 0.0).cast<double>().matrix());
  g.W1.noalias() = dz1 * xc.transpose();
  g.b1 = dz1.rowwise().sum();
  return loss;
}

// Smoothed predictor: average of the network over the stored noise draws.
// An empty bank means no smoothing. Rows of X are inputs.
inline Eigen::VectorXd predict_smoothed(const MlpModel& m,
                                        const std::vector<Eigen::VectorXd>& eps,
                                        const Eigen::MatrixXd& X,
                                        int draw_limit = 0) {
  if (eps.empty()) return mlp_forward(m, X);
  const int K = draw_limit > 0
                    ? std::min<int>(draw_limit, static_cast<int>(eps.size()))
                    : static_cast<int>(eps.size());
  const Eigen::MatrixXd xt = X.transpose();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(X.rows());
  detail::MlpActivations act;
  for (int k = 0; k < K; ++k) {
    detail::mlp_forward_cols(m, xt.colwise() + eps[static_cast<size_t>(k)],
                             act);
    acc += act.out.transpose();
  }
  return acc / K;
}

inline double mean_squared_error(const Eigen::VectorXd& pred,
                                 const Eigen::VectorXd& target) {
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

struct SgdConfig {
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.0;  // coupled: added to every parameter gradient
  int batch_size = 10;
  long max_iters = 100000;
  int eval_every = 200;
  int augment_subsample = 8;  // per-batch-element draws from the bank
  int eval_draws = 0;         // validation-eval draw cap; 0 = whole bank
  int patience = std::numeric_limits<int>::max();  // in eval periods
  enum class Select { BestValidation, Final };
  Select select = Select::BestValidation;
  uint64_t seed = 1;

  void validate() const {
    if (!(lr > 0)) throw std::invalid_argument("sgd: lr must be positive");
    if (!(momentum >= 0) || !(momentum < 1))
      throw std::invalid_argument("sgd: momentum must lie in [0, 1)");
    if (weight_decay < 0)
      throw std::invalid_argument("sgd: weight decay must be nonnegative");
    if (batch_size < 1 || max_iters < 0 || eval_every < 1 ||
        augment_subsample < 1 || patience < 1)
      throw std::invalid_argument("sgd: counts must be positive");
  }
};

struct TrainCurvePoint {
  long iter = 0;
  double train_loss = 0;  // mean step loss since the previous record
  double val_loss = 0;
};

struct MlpTrainResult {
  MlpModel model;  // best-so-far or final snapshot per cfg.select
  std::vector<Eigen::VectorXd> noise_draws;  // the shared augmentation bank
  std::vector<TrainCurvePoint> curve;
  long t_used = 0;    // iteration the returned snapshot was taken at
  long iters_run = 0;
  double best_val = std::numeric_limits<double>::quiet_NaN();
};

// SGD with momentum on the per-augmentation loss. The noise bank of N draws
// is sampled once up front; each batch element resamples augment_subsample
// bank indices per step. Validation every eval_every steps uses the smoothed
// predictor over the first eval_draws bank entries. Throws on divergence
// (step loss above 1e6 or non-finite).
inline MlpTrainResult train_augmented(
    const MlpModel& init, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
    const NoiseSpec& noise, int N, const SgdConfig& cfg,
    const Eigen::MatrixXd& val_X, const Eigen::VectorXd& val_y) {
  cfg.validate();
  noise.validate();
  const auto n = X.rows();
  if (n < 1 || y.size() != n)
    throw std::invalid_argument("train_augmented: bad training set");
  if (X.cols() != init.input_dim())
    throw std::invalid_argument("train_augmented: input dimension mismatch");
  const bool has_val = val_X.rows() > 0;
  if (has_val && val_y.size() != val_X.rows())
    throw std::invalid_argument("train_augmented: bad validation set");
  if (cfg.select == SgdConfig::Select::BestValidation && !has_val)
    throw std::invalid_argument(
        "train_augmented: best-validation selection needs a validation set");
  if (N < 1) throw std::invalid_argument("train_augmented: need N >= 1");

  MlpTrainResult res;
  const bool smoothing = !noise.is_degenerate();
  if (smoothing) {
    Rng noise_rng(derive_seed(cfg.seed, 1));
    res.noise_draws = sample(noise, N, noise_rng);
  }
  const int A = smoothing ? cfg.augment_subsample : 1;
  const int B = static_cast<int>(
      std::min<long>(cfg.batch_size, static_cast<long>(n)));

  Rng rng(derive_seed(cfg.seed, 2));
  MlpModel model = init;
  MlpGrads vel = MlpGrads::zeros_like(model);
  MlpGrads g = MlpGrads::zeros_like(model);

  const int D = model.input_dim();
  Eigen::MatrixXd xb(D, B * A);
  Eigen::VectorXd yb(B * A);
  const Eigen::MatrixXd xt = X.transpose();

  auto val_loss_now = [&](const MlpModel& m) {
    return mean_squared_error(
        predict_smoothed(m, res.noise_draws, val_X, cfg.eval_draws), val_y);
  };

  long best_iter = 0;
  double best_val = std::numeric_limits<double>::infinity();
  MlpModel best = model;
  int stale_evals = 0;
  double loss_acc = 0;
  long loss_count = 0;
  long t = 0;
  for (; t < cfg.max_iters;) {
    // assemble the augmented minibatch
    for (int j = 0; j < B; ++j) {
      const auto row =
          static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(n));
      const auto jj = std::min<Eigen::Index>(row, n - 1);
      for (int a = 0; a < A; ++a) {
        const int col = j * A + a;
        if (smoothing) {
          const auto k = std::min<size_t>(
              static_cast<size_t>(rng.uniform() * res.noise_draws.size()),
              res.noise_draws.size() - 1);
          xb.col(col) = xt.col(jj) + res.noise_draws[k];
        } else {
          xb.col(col) = xt.col(jj);
        }
        yb(col) = y(jj);
      }
    }

    const double loss = mlp_loss_grad(model, xb, yb, g);
    if (!std::isfinite(loss) || loss > 1e6)
      throw std::runtime_error("train_augmented: training diverged");
    loss_acc += loss;
    ++loss_count;

    const double wd = cfg.weight_decay;
    const double mu = cfg.momentum;
    vel.W1 = mu * vel.W1 + g.W1 + wd * model.W1;
    vel.b1 = mu * vel.b1 + g.b1 + wd * model.b1;
    vel.W2 = mu * vel.W2 + g.W2 + wd * model.W2;
    vel.b2 = mu * vel.b2 + g.b2 + wd * model.b2;
    vel.w3 = mu * vel.w3 + g.w3 + wd * model.w3;
    vel.b3 = mu * vel.b3 + g.b3 + wd * model.b3;
    model.W1 -= cfg.lr * vel.W1;
    model.b1 -= cfg.lr * vel.b1;
    model.W2 -= cfg.lr * vel.W2;
    model.b2 -= cfg.lr * vel.b2;
    model.w3 -= cfg.lr * vel.w3;
    model.b3 -= cfg.lr * vel.b3;
    ++t;

    if (t % cfg.eval_every == 0 || t == cfg.max_iters) {
      TrainCurvePoint pt;
      pt.iter = t;
      pt.train_loss = loss_count > 0 ? loss_acc / loss_count : 0.0;
      loss_acc = 0;
      loss_count = 0;
      pt.val_loss =
          has_val ? val_loss_now(model) : std::numeric_limits<double>::quiet_NaN();
      res.curve.push_back(pt);
      if (has_val) {
        if (pt.val_loss < best_val) {
          best_val = pt.val_loss;
          best_iter = t;
          best = model;
          stale_evals = 0;
        } else if (++stale_evals >= cfg.patience &&
                   cfg.select == SgdConfig::Select::BestValidation) {
          break;
        }
      }
    }
  }

  res.iters_run = t;
  if (cfg.select == SgdConfig::Select::BestValidation) {
    res.model = best;
    res.t_used = best_iter;
    res.best_val = best_val;
  } else {
    res.model = model;
    res.t_used = t;
    res.best_val = has_val ? best_val : std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

// Max relative disagreement between backprop and central differences
// (h = 1e-5) of the single-input squared loss, over every parameter.
inline double grad_check(const MlpModel& model, const Eigen::VectorXd& x,
                         double y, double h = 1e-5) {
  MlpGrads g = MlpGrads::zeros_like(model);
  Eigen::VectorXd yv(1);
  yv << y;
  mlp_loss_grad(model, x, yv, g);

  MlpModel m = model;
  auto loss_at = [&]() {
    const double diff = mlp_forward(m, x) - y;
    return 0.5 * diff * diff;
  };
  double worst = 0;
  auto probe = [&](double& param, double grad) {
    const double save = param;
    param = save + h;
    const double up = loss_at();
    param = save - h;
    const double dn = loss_at();
    param = save;
    const double fd = (up - dn) / (2.0 * h);
    // The 1e-6 floor keeps cancellation noise in the difference quotient
    // (about 1e-12 absolute) from dominating near-zero gradients.
    const double scale = std::max(1e-6, std::abs(fd) + std::abs(grad));
    worst = std::max(worst, std::abs(fd - grad) / scale);
  };
  for (int i = 0; i < m.W1.rows(); ++i)
    for (int j = 0; j < m.W1.cols(); ++j) probe(m.W1(i, j), g.W1(i, j));
  for (int i = 0; i < m.b1.size(); ++i) probe(m.b1(i), g.b1(i));
  for (int i = 0; i < m.W2.rows(); ++i)
    for (int j = 0; j < m.W2.cols(); ++j) probe(m.W2(i, j), g.W2(i, j));
  for (int i = 0; i < m.b2.size(); ++i) probe(m.b2(i), g.b2(i));
  for (int i = 0; i < m.w3.size(); ++i) probe(m.w3(i), g.w3(i));
  probe(m.b3, g.b3);
  return worst;
}

// Smallest |preactivation| at x: distance to the nearest ReLU kink, used to
// screen grad-check inputs.
inline double kink_margin(const MlpModel& m, const Eigen::VectorXd& x) {
  detail::MlpActivations act;
  detail::mlp_forward_cols(m, x, act);
  return std::min(act.z1.cwiseAbs().minCoeff(), act.z2.cwiseAbs().minCoeff());
}

}  // namespace rsk
