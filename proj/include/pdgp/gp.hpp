#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pdgp/errors.hpp"
#include "pdgp/rng.hpp"

namespace pdgp {

// theta = (amplitude, length_scale, noise): signal amplitude and length scale
// of the squared-exponential kernel, plus the additive diagonal noise level.
struct Hyperparameters {
  double amplitude = 1.0;
  double length_scale = 1.0;
  double noise = 0.1;

  bool positive() const { return amplitude > 0.0 && length_scale > 0.0 && noise > 0.0; }
};

struct TrainOptions {
  int max_iters = 60;
  double step_size = 0.1;        // applied in log-hyperparameter space
  double grad_tol = 1e-3;        // stop when the log-space gradient norm drops below
  double min_hyperparam = 1e-8;  // positivity floor after each step
  size_t subsample_cap = 4000;   // exact-GP size limit; 0 disables subsampling
  uint64_t subsample_seed = 0x5eed;
  int max_halvings = 12;         // backtracking budget per iteration
};

struct TrainingMeta {
  std::string model_kind;
  std::string fold_id;
  size_t n_total = 0;     // rows offered to train()
  size_t n_used = 0;      // rows retained after subsampling
  int iterations = 0;
  double final_nlml = 0.0;
  double jitter = 0.0;    // diagonal boost needed by the final Cholesky
};

struct GpModel {
  Hyperparameters theta;
  Eigen::MatrixXd X;      // n x d retained training inputs
  Eigen::VectorXd alpha;  // (K + noise I)^-1 y
  Eigen::MatrixXd chol;   // lower-triangular factor of the noisy Gram matrix
  TrainingMeta meta;

  Eigen::Index size() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }
};

// k(x, x') = amp^2 exp(-|x-x'|^2 / (2 len^2)) + noise * [same indexed point].
inline double kernel_se(const Eigen::VectorXd& x, const Eigen::VectorXd& xp,
                        const Hyperparameters& theta, bool same_index) {
  if (x.size() != xp.size())
    fail(errc::layout_mismatch, "kernel_se: dimension mismatch " + std::to_string(x.size()) +
                                    " vs " + std::to_string(xp.size()));
  const double sq = (x - xp).squaredNorm();
  double v = theta.amplitude * theta.amplitude *
             std::exp(-sq / (2.0 * theta.length_scale * theta.length_scale));
  if (same_index) v += theta.noise;
  return v;
}

namespace gp_detail {

// Pairwise squared Euclidean distances, computed once and reused across
// optimizer iterations.
inline Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& X) {
  const Eigen::VectorXd sq = X.rowwise().squaredNorm();
  Eigen::MatrixXd D = sq.replicate(1, X.rows()) + sq.transpose().replicate(X.rows(), 1) -
                      2.0 * (X * X.transpose());
  return D.cwiseMax(0.0);
}

inline Eigen::MatrixXd kernel_from_distances(const Eigen::MatrixXd& D,
                                             const Hyperparameters& theta) {
  const double a2 = theta.amplitude * theta.amplitude;
  const double inv = -1.0 / (2.0 * theta.length_scale * theta.length_scale);
  return a2 * (D * inv).array().exp().matrix();
}

// Cholesky with escalating diagonal jitter: 1e-10, x10 per retry, giving up
// beyond 1e-4.
inline Eigen::LLT<Eigen::MatrixXd> cholesky_with_jitter(const Eigen::MatrixXd& K,
                                                        double* jitter_used) {
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() == Eigen::Success) {
    if (jitter_used) *jitter_used = 0.0;
    return llt;
  }
  for (double jitter = 1e-10; jitter <= 1e-4 + 1e-20; jitter *= 10.0) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    llt.compute(Kj);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = jitter;
      return llt;
    }
  }
  fail(errc::numerical_breakdown,
       "Gram matrix not positive definite even with 1e-4 diagonal jitter");
}

struct NlmlState {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd alpha;
  double nlml = 0.0;
  double jitter = 0.0;
};

inline NlmlState evaluate_nlml(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                               const Hyperparameters& theta) {
  const Eigen::Index n = y.size();
  Eigen::MatrixXd K = kernel_from_distances(D, theta);
  K.diagonal().array() += theta.noise;
  NlmlState s;
  s.llt = cholesky_with_jitter(K, &s.jitter);
  s.alpha = s.llt.solve(y);
  const double log_det =
      2.0 * s.llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  s.nlml = 0.5 * y.dot(s.alpha) + 0.5 * log_det +
           0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
  return s;
}

// d nlml / d theta via the trace identity: for each kernel parameter p,
// grad_p = 1/2 tr((K^-1 - alpha alpha^T) dK/dp).
inline Eigen::Vector3d nlml_gradient_state(const Eigen::MatrixXd& D, const NlmlState& s,
                                           const Hyperparameters& theta) {
  const Eigen::Index n = s.alpha.size();
  const Eigen::MatrixXd Kse = kernel_from_distances(D, theta);
  Eigen::MatrixXd A =
      s.llt.solve(Eigen::MatrixXd::Identity(n, n)) - s.alpha * s.alpha.transpose();
  const double l = theta.length_scale;
  Eigen::Vector3d g;
  g[0] = 0.5 * (A.cwiseProduct(Kse).sum()) * (2.0 / theta.amplitude);
  g[1] = 0.5 * (A.cwiseProduct(Kse.cwiseProduct(D)).sum()) / (l * l * l);
  g[2] = 0.5 * A.trace();
  return g;
}

}  // namespace gp_detail

inline Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X, const Hyperparameters& theta) {
  Eigen::MatrixXd K = gp_detail::kernel_from_distances(gp_detail::squared_distances(X), theta);
  K.diagonal().array() += theta.noise;
  return K;
}

inline double nlml(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const Hyperparameters& theta) {
  return gp_detail::evaluate_nlml(gp_detail::squared_distances(X), y, theta).nlml;
}

inline Eigen::Vector3d nlml_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const Hyperparameters& theta) {
  const Eigen::MatrixXd D = gp_detail::squared_distances(X);
  const auto state = gp_detail::evaluate_nlml(D, y, theta);
  return gp_detail::nlml_gradient_state(D, state, theta);
}

// Gradient descent on the negative log marginal likelihood in
// log-hyperparameter space (which keeps every parameter positive), with
// backtracking halving whenever a step would increase the objective.
inline GpModel train(const Eigen::MatrixXd& X_in, const Eigen::VectorXd& y_in,
                     const Hyperparameters& theta0, const TrainOptions& opts = {}) {
  if (opts.max_iters < 1) fail(errc::invalid_config, "max_iters must be >= 1");
  if (opts.step_size <= 0.0 || opts.grad_tol <= 0.0 || opts.min_hyperparam <= 0.0)
    fail(errc::invalid_config, "step_size, grad_tol and min_hyperparam must be positive");
  if (!theta0.positive()) fail(errc::invalid_config, "initial hyperparameters must be positive");
  if (X_in.rows() < 2)
    fail(errc::insufficient_training_data,
         "GP training needs >= 2 rows, got " + std::to_string(X_in.rows()));
  if (X_in.rows() != y_in.size())
    fail(errc::layout_mismatch, "X rows and y length differ");

  GpModel m;
  m.meta.n_total = static_cast<size_t>(X_in.rows());

  // Seeded uniform subsample without replacement when over the cap.
  if (opts.subsample_cap > 0 && static_cast<size_t>(X_in.rows()) > opts.subsample_cap) {
    const size_t n = static_cast<size_t>(X_in.rows());
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    rng r(opts.subsample_seed);
    for (size_t i = 0; i < opts.subsample_cap; ++i) {
      const size_t j = i + r.below(n - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(opts.subsample_cap);
    std::sort(idx.begin(), idx.end());
    m.X.resize(static_cast<Eigen::Index>(opts.subsample_cap), X_in.cols());
    Eigen::VectorXd y(static_cast<Eigen::Index>(opts.subsample_cap));
    for (size_t i = 0; i < opts.subsample_cap; ++i) {
      m.X.row(static_cast<Eigen::Index>(i)) = X_in.row(static_cast<Eigen::Index>(idx[i]));
      y[static_cast<Eigen::Index>(i)] = y_in[static_cast<Eigen::Index>(idx[i])];
    }
    TrainOptions inner = opts;
    inner.subsample_cap = 0;
    GpModel sub = train(m.X, y, theta0, inner);
    sub.meta.n_total = m.meta.n_total;
    return sub;
  }

  m.X = X_in;
  m.meta.n_used = static_cast<size_t>(X_in.rows());

  const Eigen::MatrixXd D = gp_detail::squared_distances(m.X);
  Eigen::Vector3d u(std::log(theta0.amplitude), std::log(theta0.length_scale),
                    std::log(theta0.noise));
  auto theta_of = [&](const Eigen::Vector3d& v) {
    Hyperparameters t;
    t.amplitude = std::max(std::exp(v[0]), opts.min_hyperparam);
    t.length_scale = std::max(std::exp(v[1]), opts.min_hyperparam);
    t.noise = std::max(std::exp(v[2]), opts.min_hyperparam);
    return t;
  };

  Hyperparameters theta = theta_of(u);
  gp_detail::NlmlState state = gp_detail::evaluate_nlml(D, y_in, theta);
  int iterations = 0;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const Eigen::Vector3d g_theta = gp_detail::nlml_gradient_state(D, state, theta);
    // Chain rule for u = log(theta): d nlml / d u_k = theta_k * d nlml / d theta_k.
    const Eigen::Vector3d g(g_theta[0] * theta.amplitude, g_theta[1] * theta.length_scale,
                            g_theta[2] * theta.noise);
    if (g.norm() <= opts.grad_tol) break;

    double step = opts.step_size;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h, step *= 0.5) {
      const Eigen::Vector3d u_try = u - step * g;
      const Hyperparameters theta_try = theta_of(u_try);
      gp_detail::NlmlState trial = gp_detail::evaluate_nlml(D, y_in, theta_try);
      if (trial.nlml <= state.nlml) {
        u = u_try;
        theta = theta_try;
        state = std::move(trial);
        accepted = true;
        break;
      }
    }
    ++iterations;
    if (!accepted) break;  // flat to within the backtracking budget
  }

  m.theta = theta;
  m.alpha = state.alpha;
  m.chol = state.llt.matrixL();
  m.meta.iterations = iterations;
  m.meta.final_nlml = state.nlml;
  m.meta.jitter = state.jitter;
  return m;
}

struct PosteriorPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

inline PosteriorPrediction predict(const GpModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.dim())
    fail(errc::layout_mismatch, "predict: query dimension " + std::to_string(x.size()) +
                                    " does not match model dimension " +
                                    std::to_string(m.dim()));
  const double a2 = m.theta.amplitude * m.theta.amplitude;
  const double inv = -1.0 / (2.0 * m.theta.length_scale * m.theta.length_scale);
  const Eigen::VectorXd ks =
      (a2 * ((m.X.rowwise() - x.transpose()).rowwise().squaredNorm() * inv).array().exp())
          .matrix();
  PosteriorPrediction out;
  out.mean = ks.dot(m.alpha);
  const Eigen::VectorXd v =
      m.chol.triangularView<Eigen::Lower>().solve(ks);  // |v|^2 = ks^T K^-1 ks
  out.variance = std::max(0.0, a2 + m.theta.noise - v.squaredNorm());
  return out;
}

}  // namespace pdgp
