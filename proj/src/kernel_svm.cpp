#include "altune/kernel_svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace altune {

namespace {

constexpr double kTau = 1e-12;

double rbf(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b,
           double gamma) {
  return std::exp(-gamma * (a - b).squaredNorm());
}

}  // namespace

KernelSvm KernelSvm::train(Eigen::MatrixXd inputs, const Eigen::VectorXd& labels,
                           const SvmOptions& options) {
  const auto n = inputs.rows();
  if (n == 0) throw std::invalid_argument("KernelSvm::train: no training samples");
  if (labels.size() != n) throw std::invalid_argument("KernelSvm::train: label count mismatch");
  if (!(options.c > 0.0)) throw std::invalid_argument("KernelSvm::train: C must be positive");
  if (!(options.gamma >= 0.0)) throw std::invalid_argument("KernelSvm::train: gamma must be >= 0");

  KernelSvm m;
  m.c_ = options.c;
  m.gamma_ = options.gamma > 0.0 ? options.gamma : 1.0 / static_cast<double>(inputs.cols());
  m.labels_ = labels;

  // Q_ij = y_i y_j K_ij, precomputed; training sets here stay small.
  Eigen::MatrixXd q(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = labels[i] * labels[j] * rbf(inputs.row(i), inputs.row(j), m.gamma_);
      q(i, j) = v;
      q(j, i) = v;
    }
  }
  const Eigen::VectorXd qd = q.diagonal();
  const double c = m.c_;
  const Eigen::VectorXd& y = labels;

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);
  auto upper = [&](Eigen::Index t) { return alpha[t] >= c; };
  auto lower = [&](Eigen::Index t) { return alpha[t] <= 0.0; };

  double gap = 0.0;
  long iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    // First index: maximal violation over I_up.
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!upper(t) && -grad[t] >= gmax) { gmax = -grad[t]; i = t; }
      } else {
        if (!lower(t) && grad[t] >= gmax) { gmax = grad[t]; i = t; }
      }
    }
    // Second index: maximal objective decrease over I_low.
    double gmax2 = -std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (lower(t)) continue;
        const double grad_diff = gmax + grad[t];
        gmax2 = std::max(gmax2, grad[t]);
        if (i >= 0 && grad_diff > 0) {
          double quad = qd[i] + qd[t] - 2.0 * y[i] * q(i, t);
          if (quad <= 0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best_obj) { best_obj = obj; j = t; }
        }
      } else {
        if (upper(t)) continue;
        const double grad_diff = gmax - grad[t];
        gmax2 = std::max(gmax2, -grad[t]);
        if (i >= 0 && grad_diff > 0) {
          double quad = qd[i] + qd[t] + 2.0 * y[i] * q(i, t);
          if (quad <= 0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best_obj) { best_obj = obj; j = t; }
        }
      }
    }
    gap = gmax + gmax2;
    if (i < 0 || j < 0 || gap < options.tolerance) break;

    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = qd[i] + qd[j] + 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > 0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = qd[i] + qd[j] - 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }
    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    grad += q.col(i) * dai + q.col(j) * daj;
  }

  // Bias: average over free vectors, else midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  int n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  m.rho_ = n_free > 0 ? sum_free / n_free : (ub + lb) / 2.0;
  if (!std::isfinite(m.rho_)) m.rho_ = 0.0;

  m.alphas_ = alpha;
  m.kkt_gap_ = std::max(gap, 0.0);
  m.iterations_ = iter;
  m.inputs_ = std::move(inputs);
  return m;
}

double KernelSvm::decision(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != inputs_.cols()) throw std::invalid_argument("KernelSvm: query dimension mismatch");
  const Eigen::RowVectorXd xr = x.transpose();
  double s = 0.0;
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
    if (alphas_[i] > 0.0) s += alphas_[i] * labels_[i] * rbf(inputs_.row(i), xr, gamma_);
  }
  return s - rho_;
}

double PlattSigmoid::operator()(double decision) const {
  const double z = a * decision + b;
  return z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

PlattSigmoid fit_platt(std::span<const double> decisions, std::span<const double> labels) {
  if (decisions.size() != labels.size() || decisions.empty())
    throw std::invalid_argument("fit_platt: need equally many decisions and labels");
  const std::size_t n = decisions.size();
  double prior1 = 0.0;
  for (double l : labels) prior1 += l > 0 ? 1.0 : 0.0;
  const double prior0 = static_cast<double>(n) - prior1;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] > 0 ? hi : lo;

  auto nll = [&](double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = decisions[i] * a + b;
      f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double fval = nll(a, b);
  for (int iter = 0; iter < 100; ++iter) {
    double h11 = 1e-12, h22 = 1e-12, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = decisions[i] * a + b;
      double p, q;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += decisions[i] * decisions[i] * d2;
      h22 += d2;
      h21 += decisions[i] * d2;
      const double d1 = t[i] - p;
      g1 += decisions[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= 1e-10) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = nll(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < 1e-10) break;
  }
  return {a, b};
}

CalibratedSvm CalibratedSvm::train(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& labels,
                                   const SvmOptions& options, Rng& rng) {
  const auto n = static_cast<std::size_t>(inputs.rows());
  const int folds = std::max(2, options.platt_folds);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);

  std::vector<double> decisions(n);
  std::vector<double> ys(n);
  for (int f = 0; f < folds; ++f) {
    const std::size_t begin = f * n / folds;
    const std::size_t end = (f + 1) * n / folds;
    if (begin == end) continue;
    std::vector<std::size_t> train_idx;
    for (std::size_t i = 0; i < n; ++i)
      if (i < begin || i >= end) train_idx.push_back(perm[i]);

    int pos = 0, neg = 0;
    for (std::size_t idx : train_idx) (labels[static_cast<Eigen::Index>(idx)] > 0 ? pos : neg)++;

    std::optional<KernelSvm> sub;
    if (pos > 0 && neg > 0) {
      Eigen::MatrixXd x(static_cast<Eigen::Index>(train_idx.size()), inputs.cols());
      Eigen::VectorXd y(static_cast<Eigen::Index>(train_idx.size()));
      for (std::size_t r = 0; r < train_idx.size(); ++r) {
        x.row(static_cast<Eigen::Index>(r)) = inputs.row(static_cast<Eigen::Index>(train_idx[r]));
        y[static_cast<Eigen::Index>(r)] = labels[static_cast<Eigen::Index>(train_idx[r])];
      }
      sub = KernelSvm::train(std::move(x), y, options);
    }
    for (std::size_t i = begin; i < end; ++i) {
      const auto idx = static_cast<Eigen::Index>(perm[i]);
      // A single-class (or empty) training fold votes for its class outright.
      decisions[i] = sub ? sub->decision(inputs.row(idx).transpose())
                         : (pos > 0 ? 1.0 : (neg > 0 ? -1.0 : 0.0));
      ys[i] = labels[idx];
    }
  }
  PlattSigmoid sigmoid = fit_platt(decisions, ys);
  return CalibratedSvm(KernelSvm::train(inputs, labels, options), sigmoid);
}

double CalibratedSvm::probability(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return sigmoid_(svm_.decision(x));
}

}  // namespace altune
