#include "altune/gp_classifier.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "altune/errors.hpp"

namespace altune {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log sigmoid(z) without overflow.
double log_sigmoid(double z) {
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

}  // namespace

GpClassifier GpClassifier::fit(Eigen::MatrixXd inputs, const Eigen::VectorXd& labels,
                               const KernelParams& kernel, const GpClassifierOptions& options) {
  if (inputs.rows() == 0) throw std::invalid_argument("GpClassifier::fit: no training samples");
  if (inputs.rows() != labels.size())
    throw std::invalid_argument("GpClassifier::fit: inputs and labels differ in length");
  kernel.validate(inputs.cols());

  const auto n = inputs.rows();
  const Eigen::MatrixXd k = kernel_matrix(inputs, inputs, kernel);
  const Eigen::ArrayXd targets = (labels.array() + 1.0) * 0.5;  // 1 for +1, 0 for -1

  GpClassifier m;
  m.inputs_ = std::move(inputs);
  m.kernel_ = kernel;

  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  Eigen::ArrayXd pi(n);
  Eigen::ArrayXd w(n);
  Eigen::VectorXd sw(n);
  Eigen::LLT<Eigen::MatrixXd> llt;

  auto refresh = [&](const Eigen::VectorXd& latent) {
    for (Eigen::Index i = 0; i < n; ++i) pi[i] = sigmoid(latent[i]);
    w = pi * (1.0 - pi);
    sw = w.sqrt().matrix();
    Eigen::MatrixXd b = sw.asDiagonal() * k * sw.asDiagonal();
    b.diagonal().array() += 1.0;
    llt.compute(b);
    if (llt.info() != Eigen::Success)
      throw FactorizationError("GpClassifier: I + W^1/2 K W^1/2 not positive definite");
  };
  auto objective = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& latent) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) ll += log_sigmoid(labels[i] * latent[i]);
    return -0.5 * a.dot(latent) + ll;
  };

  double previous = -std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    refresh(f);
    const Eigen::VectorXd grad = (targets - pi).matrix();
    const Eigen::VectorXd b = (w * f.array()).matrix() + grad;
    Eigen::VectorXd c = sw.asDiagonal() * (k * b);
    c = llt.solve(c);
    const Eigen::VectorXd a = b - sw.asDiagonal() * c;
    f = k * a;
    const double obj = objective(a, f);
    m.iterations_ = iter;
    if (std::abs(obj - previous) < options.tolerance) {
      m.converged_ = true;
      break;
    }
    previous = obj;
  }

  refresh(f);
  m.mode_ = f;
  m.log_lik_grad_ = (targets - pi).matrix();
  m.sqrt_w_ = sw;
  m.b_factor_ = llt;
  return m;
}

Eigen::VectorXd GpClassifier::kernel_vector(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != inputs_.cols())
    throw std::invalid_argument("GpClassifier: query dimension mismatch");
  Eigen::VectorXd ks(inputs_.rows());
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i)
    ks[i] = kernel_eval(inputs_.row(i).transpose(), x, kernel_);
  return ks;
}

double GpClassifier::latent_mean(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return kernel_vector(x).dot(log_lik_grad_);
}

double GpClassifier::latent_variance(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd ks = kernel_vector(x);
  const Eigen::VectorXd v = b_factor_.matrixL().solve(sqrt_w_.asDiagonal() * ks);
  return std::max(0.0, kernel_.signal_variance - v.squaredNorm());
}

double GpClassifier::probability(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd ks = kernel_vector(x);
  const double mean = ks.dot(log_lik_grad_);
  const Eigen::VectorXd v = b_factor_.matrixL().solve(sqrt_w_.asDiagonal() * ks);
  const double var = std::max(0.0, kernel_.signal_variance - v.squaredNorm());
  return sigmoid(mean / std::sqrt(1.0 + std::numbers::pi * var / 8.0));
}

}  // namespace altune
