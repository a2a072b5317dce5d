#include "altune/gp_regression.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "altune/errors.hpp"

namespace altune {

namespace {

constexpr double kMinJitter = 1e-10;
constexpr double kMaxJitter = 1e-6;

struct Standardized {
  Eigen::VectorXd values;
  double mean = 0.0;
  double scale = 1.0;
};

Standardized standardize(const Eigen::VectorXd& y) {
  Standardized s;
  const auto n = static_cast<double>(y.size());
  s.mean = y.sum() / n;
  const double var = (y.array() - s.mean).square().sum() / n;
  s.scale = var > 1e-24 ? std::sqrt(var) : 1.0;
  s.values = (y.array() - s.mean) / s.scale;
  return s;
}

// Factor K + noise*I, escalating diagonal jitter on failure.
Eigen::LLT<Eigen::MatrixXd> factorize(Eigen::MatrixXd k, double noise, double& jitter_used) {
  k.diagonal().array() += noise;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  jitter_used = 0.0;
  if (llt.info() == Eigen::Success) return llt;
  for (double jitter = kMinJitter; jitter <= kMaxJitter * 1.0000001; jitter *= 10.0) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    llt.compute(kj);
    if (llt.info() == Eigen::Success) {
      jitter_used = jitter;
      return llt;
    }
  }
  throw FactorizationError("kernel matrix not positive definite after jitter " +
                           std::to_string(kMaxJitter));
}

// Log parameter vector: [log sf2, log l_1..l_d, log sn2].
Eigen::VectorXd to_log(const KernelParams& k) {
  const auto d = k.length_scales.size();
  Eigen::VectorXd theta(d + 2);
  theta[0] = std::log(k.signal_variance);
  theta.segment(1, d) = k.length_scales.array().log();
  theta[d + 1] = std::log(k.noise_variance);
  return theta;
}

KernelParams from_log(const Eigen::VectorXd& theta) {
  const auto d = theta.size() - 2;
  KernelParams k;
  k.signal_variance = std::exp(theta[0]);
  k.length_scales = theta.segment(1, d).array().exp();
  k.noise_variance = std::exp(theta[d + 1]);
  return k;
}

struct Objective {
  double value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd gradient;
};

// Log marginal likelihood and its gradient in log-parameter space.
Objective lml_with_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& theta) {
  const KernelParams k = from_log(theta);
  const auto n = x.rows();
  const auto d = x.cols();
  const Eigen::MatrixXd kf = kernel_matrix(x, x, k);
  double jitter = 0.0;
  const auto llt = factorize(kf, k.noise_variance, jitter);
  const Eigen::VectorXd alpha = llt.solve(y);

  Objective out;
  const Eigen::MatrixXd l = llt.matrixL();
  out.value = -0.5 * y.dot(alpha) - l.diagonal().array().log().sum() -
              0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  // W = alpha alpha^T - K^{-1}; dL/dtheta_j = 1/2 tr(W dK_j).
  Eigen::MatrixXd w = llt.solve(Eigen::MatrixXd::Identity(n, n));
  w = alpha * alpha.transpose() - w;

  out.gradient.resize(d + 2);
  out.gradient[0] = 0.5 * (w.array() * kf.array()).sum();
  for (Eigen::Index dim = 0; dim < d; ++dim) {
    const double inv_l2 = 1.0 / (k.length_scales[dim] * k.length_scales[dim]);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double diff = x(i, dim) - x(j, dim);
        acc += w(i, j) * kf(i, j) * diff * diff * inv_l2;
      }
    }
    out.gradient[dim + 1] = 0.5 * acc;
  }
  out.gradient[d + 1] = 0.5 * k.noise_variance * w.trace();
  return out;
}

Objective safe_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& theta) {
  try {
    Objective o = lml_with_gradient(x, y, theta);
    if (!std::isfinite(o.value) || !o.gradient.allFinite()) return {};
    return o;
  } catch (const FactorizationError&) {
    return {};
  }
}

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::VectorXd clamp(const Eigen::VectorXd& v) const {
    return v.cwiseMax(lower).cwiseMin(upper);
  }
};

Box search_box(Eigen::Index d) {
  Box b{Eigen::VectorXd(d + 2), Eigen::VectorXd(d + 2)};
  b.lower[0] = std::log(1e-3);
  b.upper[0] = std::log(1e3);
  b.lower.segment(1, d).setConstant(std::log(1e-2));
  b.upper.segment(1, d).setConstant(std::log(1e2));
  b.lower[d + 1] = std::log(1e-6);
  b.upper[d + 1] = std::log(10.0);
  return b;
}

// Projected L-BFGS ascent with Armijo backtracking. Returns the best point
// visited, or nullopt when the start itself cannot be evaluated.
std::optional<std::pair<Eigen::VectorXd, double>> local_search(const Eigen::MatrixXd& x,
                                                               const Eigen::VectorXd& y,
                                                               Eigen::VectorXd theta,
                                                               const Box& box, int max_iter) {
  constexpr int kMemory = 6;
  theta = box.clamp(theta);
  Objective cur = safe_objective(x, y, theta);
  if (!std::isfinite(cur.value)) return std::nullopt;

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> history;  // (s, y) for -f
  auto projected = [&](const Eigen::VectorXd& th, Eigen::VectorXd g) {
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if ((th[i] <= box.lower[i] && g[i] < 0) || (th[i] >= box.upper[i] && g[i] > 0)) g[i] = 0;
    }
    return g;
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd pg = projected(theta, cur.gradient);
    if (pg.lpNorm<Eigen::Infinity>() < 1e-5) break;

    // Two-loop recursion on the minimization problem -f, then flip sign.
    Eigen::VectorXd q = -pg;
    std::vector<double> rho(history.size()), a(history.size());
    for (int i = static_cast<int>(history.size()) - 1; i >= 0; --i) {
      const auto& [s, yv] = history[static_cast<std::size_t>(i)];
      rho[i] = 1.0 / yv.dot(s);
      a[i] = rho[i] * s.dot(q);
      q -= a[i] * yv;
    }
    if (!history.empty()) {
      const auto& [s, yv] = history.back();
      q *= s.dot(yv) / yv.dot(yv);
    } else {
      q /= std::max(1.0, pg.lpNorm<Eigen::Infinity>());
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
      const auto& [s, yv] = history[i];
      const double b = rho[i] * yv.dot(q);
      q += (a[i] - b) * s;
    }
    Eigen::VectorXd dir = projected(theta, -q);
    if (dir.dot(pg) <= 0.0) {
      dir = pg / std::max(1.0, pg.lpNorm<Eigen::Infinity>());
      history.clear();
    }

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd next;
    Objective next_obj;
    for (int tries = 0; tries < 30; ++tries) {
      next = box.clamp(theta + step * dir);
      next_obj = safe_objective(x, y, next);
      if (std::isfinite(next_obj.value) &&
          next_obj.value >= cur.value + 1e-4 * cur.gradient.dot(next - theta)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd s = next - theta;
    const Eigen::VectorXd yv = cur.gradient - next_obj.gradient;
    if (s.dot(yv) > 1e-10) {
      history.emplace_back(s, yv);
      if (history.size() > kMemory) history.pop_front();
    }
    const double improvement = next_obj.value - cur.value;
    theta = next;
    cur = std::move(next_obj);
    if (improvement < 1e-10 * (1.0 + std::abs(cur.value))) break;
  }
  return std::make_pair(theta, cur.value);
}

}  // namespace

KernelParams KernelParams::defaults(Eigen::Index dimension) {
  KernelParams k;
  k.signal_variance = 1.0;
  k.length_scales = Eigen::VectorXd::Constant(dimension, 0.3);
  k.noise_variance = 0.1;
  return k;
}

void KernelParams::validate(Eigen::Index dimension) const {
  if (length_scales.size() != dimension)
    throw std::invalid_argument("kernel has " + std::to_string(length_scales.size()) +
                                " length scales for " + std::to_string(dimension) +
                                "-dimensional inputs");
  if (!(signal_variance > 0.0) || !(noise_variance > 0.0) ||
      !(length_scales.array() > 0.0).all())
    throw std::invalid_argument("kernel hyperparameters must be strictly positive");
}

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b, const KernelParams& k) {
  if (a.size() != b.size() || a.size() != k.length_scales.size())
    throw std::invalid_argument("kernel_eval: dimension mismatch");
  double r2 = 0.0;
  for (Eigen::Index d = 0; d < a.size(); ++d) {
    const double z = (a[d] - b[d]) / k.length_scales[d];
    r2 += z * z;
  }
  return k.signal_variance * std::exp(-0.5 * r2);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const KernelParams& k) {
  if (a.cols() != b.cols() || a.cols() != k.length_scales.size())
    throw std::invalid_argument("kernel_matrix: dimension mismatch");
  const Eigen::ArrayXd inv_l = k.length_scales.array().inverse();
  const Eigen::MatrixXd as = a * inv_l.matrix().asDiagonal();
  const Eigen::MatrixXd bs = b * inv_l.matrix().asDiagonal();
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out(i, j) = k.signal_variance * std::exp(-0.5 * (as.row(i) - bs.row(j)).squaredNorm());
    }
  }
  return out;
}

GPModel GPModel::fit(Eigen::MatrixXd inputs, const Eigen::VectorXd& targets,
                     const KernelParams& kernel) {
  if (inputs.rows() == 0) throw std::invalid_argument("GPModel::fit: no training samples");
  if (inputs.rows() != targets.size())
    throw std::invalid_argument("GPModel::fit: inputs and targets differ in length");
  kernel.validate(inputs.cols());

  GPModel m;
  const Standardized s = standardize(targets);
  m.target_mean_ = s.mean;
  m.target_scale_ = s.scale;
  m.targets_ = s.values;
  m.kernel_ = kernel;
  m.inputs_ = std::move(inputs);
  m.factor_ = factorize(kernel_matrix(m.inputs_, m.inputs_, kernel), kernel.noise_variance,
                        m.jitter_);
  m.alpha_ = m.factor_.solve(m.targets_);
  return m;
}

GpPrediction GPModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dimension()) throw std::invalid_argument("GPModel::predict: dimension mismatch");
  Eigen::VectorXd ks(size());
  for (Eigen::Index i = 0; i < size(); ++i) ks[i] = kernel_eval(inputs_.row(i).transpose(), x, kernel_);
  const double mean = ks.dot(alpha_);
  const Eigen::VectorXd v = factor_.matrixL().solve(ks);
  const double var = std::max(0.0, kernel_.signal_variance - v.squaredNorm());
  return {mean * target_scale_ + target_mean_, var * target_scale_ * target_scale_};
}

GpBatchPrediction GPModel::predict_batch(const Eigen::MatrixXd& queries) const {
  if (queries.cols() != dimension())
    throw std::invalid_argument("GPModel::predict_batch: dimension mismatch");
  Eigen::MatrixXd ks = kernel_matrix(inputs_, queries, kernel_);
  GpBatchPrediction out;
  out.mean = (ks.transpose() * alpha_).array() * target_scale_ + target_mean_;
  factor_.matrixL().solveInPlace(ks);
  out.variance = (kernel_.signal_variance - ks.colwise().squaredNorm().transpose().array())
                     .max(0.0) *
                 (target_scale_ * target_scale_);
  return out;
}

double GPModel::log_marginal_likelihood() const {
  const Eigen::MatrixXd l = factor_.matrixL();
  return -0.5 * targets_.dot(alpha_) - l.diagonal().array().log().sum() -
         0.5 * static_cast<double>(size()) * std::log(2.0 * std::numbers::pi);
}

HyperparamResult optimize_hyperparams(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                      const KernelParams& initial, const HyperparamSearch& search,
                                      Rng& rng) {
  if (inputs.rows() < 3)
    throw std::invalid_argument("optimize_hyperparams: need at least 3 samples");
  if (inputs.rows() != targets.size())
    throw std::invalid_argument("optimize_hyperparams: inputs and targets differ in length");
  initial.validate(inputs.cols());

  HyperparamResult result{initial, -std::numeric_limits<double>::infinity(), false};
  if (search.restarts <= 0) {
    result.log_likelihood = safe_objective(inputs, standardize(targets).values, to_log(initial)).value;
    return result;
  }

  const Eigen::VectorXd y = standardize(targets).values;
  const auto d = inputs.cols();
  const Box box = search_box(d);
  bool found = false;
  for (int r = 0; r < search.restarts; ++r) {
    Eigen::VectorXd start;
    if (r == 0) {
      start = to_log(initial);
    } else {
      start.resize(d + 2);
      start[0] = std::log(0.1) + uniform01(rng) * std::log(100.0);
      for (Eigen::Index i = 0; i < d; ++i)
        start[i + 1] = std::log(0.05) + uniform01(rng) * std::log(40.0);
      start[d + 1] = std::log(1e-3) + uniform01(rng) * std::log(500.0);
    }
    const auto local = local_search(inputs, y, start, box, search.max_iterations);
    if (local && local->second > result.log_likelihood) {
      result.params = from_log(local->first);
      result.log_likelihood = local->second;
      found = true;
    }
  }
  if (!found) {
    result.params = KernelParams::defaults(d);
    result.log_likelihood = -std::numeric_limits<double>::infinity();
    result.used_fallback = true;
  }
  return result;
}

}  // namespace altune
