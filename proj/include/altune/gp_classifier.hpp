#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "altune/gp_regression.hpp"

namespace altune {

struct GpClassifierOptions {
  double tolerance = 1e-6;  // on the change of the Laplace objective
  int max_iterations = 50;
};

/// Binary GP classifier with a logistic link, posterior approximated by
/// Laplace's method. Labels are +1 / -1. Predictive probabilities use the
/// probit-style correction sigmoid(mean / sqrt(1 + pi * var / 8)).
class GpClassifier {
 public:
  static GpClassifier fit(Eigen::MatrixXd inputs, const Eigen::VectorXd& labels,
                          const KernelParams& kernel, const GpClassifierOptions& options = {});

  double latent_mean(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double latent_variance(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Unclipped probability of the +1 class.
  double probability(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  int iterations() const { return iterations_; }
  bool converged() const { return converged_; }
  const Eigen::VectorXd& mode() const { return mode_; }

 private:
  GpClassifier() = default;
  Eigen::VectorXd kernel_vector(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  Eigen::MatrixXd inputs_;
  KernelParams kernel_;
  Eigen::VectorXd mode_;           // latent values at the posterior mode
  Eigen::VectorXd log_lik_grad_;   // d log p(y|f) / df at the mode
  Eigen::VectorXd sqrt_w_;
  Eigen::LLT<Eigen::MatrixXd> b_factor_;  // I + W^1/2 K W^1/2
  int iterations_ = 0;
  bool converged_ = false;
};

}  // namespace altune
