#include "altune/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace altune {

namespace {

struct Params {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

// Inputs live in the unit cube; the network sees them centred on zero.
Eigen::MatrixXd centre(const Eigen::MatrixXd& x) { return (2.0 * x.array() - 1.0).matrix(); }

// Column-wise softmax of a 2 x n logit matrix.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double mx = logits.col(j).maxCoeff();
    const Eigen::VectorXd e = (logits.col(j).array() - mx).exp().matrix();
    p.col(j) = e / e.sum();
  }
  return p;
}

double loss_of(const Params& p, const Eigen::MatrixXd& xt, const Eigen::MatrixXd& onehot,
               double decay) {
  const Eigen::MatrixXd h = ((p.w1 * xt).colwise() + p.b1).array().tanh().matrix();
  const Eigen::MatrixXd prob = softmax((p.w2 * h).colwise() + p.b2);
  const double n = static_cast<double>(xt.cols());
  const double ce = -(onehot.array() * prob.array().max(1e-300).log()).sum() / n;
  return ce + 0.5 * decay * (p.w1.squaredNorm() + p.w2.squaredNorm());
}

Params gradient(const Params& p, const Eigen::MatrixXd& xt, const Eigen::MatrixXd& onehot,
                double decay) {
  const double n = static_cast<double>(xt.cols());
  const Eigen::MatrixXd h = ((p.w1 * xt).colwise() + p.b1).array().tanh().matrix();
  const Eigen::MatrixXd prob = softmax((p.w2 * h).colwise() + p.b2);
  const Eigen::MatrixXd dz2 = (prob - onehot) / n;
  Params g;
  g.w2 = dz2 * h.transpose() + decay * p.w2;
  g.b2 = dz2.rowwise().sum();
  const Eigen::MatrixXd dh = p.w2.transpose() * dz2;
  const Eigen::MatrixXd dz1 = (dh.array() * (1.0 - h.array().square())).matrix();
  g.w1 = dz1 * xt.transpose() + decay * p.w1;
  g.b1 = dz1.rowwise().sum();
  return g;
}

double accuracy(const Mlp& net, const Eigen::MatrixXd& x, const std::vector<int>& y) {
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (net.predict(x.row(i).transpose()) == y[static_cast<std::size_t>(i)]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(y.size());
}

}  // namespace

Mlp Mlp::train(const Eigen::MatrixXd& inputs, const std::vector<int>& labels, int hidden,
               const MlpOptions& options, Rng& rng) {
  if (inputs.rows() == 0) throw std::invalid_argument("Mlp::train: no training samples");
  if (static_cast<std::size_t>(inputs.rows()) != labels.size())
    throw std::invalid_argument("Mlp::train: label count mismatch");
  if (hidden <= 0) throw std::invalid_argument("Mlp::train: hidden size must be positive");

  const auto d = inputs.cols();
  const auto n = inputs.rows();
  Params p;
  const double r1 = std::sqrt(6.0 / static_cast<double>(d + hidden));
  const double r2 = std::sqrt(6.0 / static_cast<double>(hidden + 2));
  p.w1.resize(hidden, d);
  for (Eigen::Index i = 0; i < p.w1.size(); ++i) p.w1.data()[i] = (2.0 * uniform01(rng) - 1.0) * r1;
  p.b1 = Eigen::VectorXd::Zero(hidden);
  p.w2.resize(2, hidden);
  for (Eigen::Index i = 0; i < p.w2.size(); ++i) p.w2.data()[i] = (2.0 * uniform01(rng) - 1.0) * r2;
  p.b2 = Eigen::VectorXd::Zero(2);

  const Eigen::MatrixXd xt = centre(inputs).transpose();
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(2, n);
  for (Eigen::Index i = 0; i < n; ++i) onehot(labels[static_cast<std::size_t>(i)] != 0 ? 1 : 0, i) = 1.0;

  Mlp net;
  double loss = loss_of(p, xt, onehot, options.weight_decay);
  net.loss_history_.push_back(loss);
  double lr = options.learning_rate;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const Params g = gradient(p, xt, onehot, options.weight_decay);
    bool accepted = false;
    for (int tries = 0; tries < 30; ++tries) {
      Params next{p.w1 - lr * g.w1, p.b1 - lr * g.b1, p.w2 - lr * g.w2, p.b2 - lr * g.b2};
      const double next_loss = loss_of(next, xt, onehot, options.weight_decay);
      if (std::isfinite(next_loss) && next_loss <= loss) {
        p = std::move(next);
        loss = next_loss;
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    if (!accepted) break;
    net.loss_history_.push_back(loss);
    lr = std::min(lr * 1.05, 4.0 * options.learning_rate);
  }
  net.w1_ = std::move(p.w1);
  net.b1_ = std::move(p.b1);
  net.w2_ = std::move(p.w2);
  net.b2_ = std::move(p.b2);
  return net;
}

std::array<double, 2> Mlp::outputs(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != w1_.cols()) throw std::invalid_argument("Mlp: query dimension mismatch");
  const Eigen::VectorXd xc = (2.0 * x.array() - 1.0).matrix();
  const Eigen::VectorXd h = (w1_ * xc + b1_).array().tanh().matrix();
  const Eigen::VectorXd z = w2_ * h + b2_;
  const double mx = z.maxCoeff();
  const double e0 = std::exp(z[0] - mx);
  const double e1 = std::exp(z[1] - mx);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

int Mlp::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const auto out = outputs(x);
  return out[1] >= out[0] ? 1 : 0;
}

Mlp fit_mlp(const Eigen::MatrixXd& inputs, const std::vector<int>& labels, const MlpOptions& options,
            Rng& rng) {
  if (options.hidden_candidates.empty())
    throw std::invalid_argument("fit_mlp: no hidden-size candidates");
  const auto n = static_cast<std::size_t>(inputs.rows());
  const auto n_val = static_cast<std::size_t>(std::floor(options.validation_fraction * static_cast<double>(n)));

  int best_hidden = *std::min_element(options.hidden_candidates.begin(), options.hidden_candidates.end());
  if (options.hidden_candidates.size() > 1 && n_val >= 1 && n - n_val >= 2) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);

    Eigen::MatrixXd xv(static_cast<Eigen::Index>(n_val), inputs.cols());
    Eigen::MatrixXd xtr(static_cast<Eigen::Index>(n - n_val), inputs.cols());
    std::vector<int> yv, ytr;
    for (std::size_t i = 0; i < n; ++i) {
      if (i < n_val) {
        xv.row(static_cast<Eigen::Index>(i)) = inputs.row(static_cast<Eigen::Index>(perm[i]));
        yv.push_back(labels[perm[i]]);
      } else {
        xtr.row(static_cast<Eigen::Index>(i - n_val)) = inputs.row(static_cast<Eigen::Index>(perm[i]));
        ytr.push_back(labels[perm[i]]);
      }
    }
    std::vector<int> sizes = options.hidden_candidates;
    std::sort(sizes.begin(), sizes.end());
    double best_acc = -1.0;
    for (int h : sizes) {
      const double acc = accuracy(Mlp::train(xtr, ytr, h, options, rng), xv, yv);
      if (acc > best_acc) {
        best_acc = acc;
        best_hidden = h;
      }
    }
  }
  return Mlp::train(inputs, labels, best_hidden, options, rng);
}

}  // namespace altune
