#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "altune/rng.hpp"

namespace altune {

struct SvmOptions {
  double c = 1.0;
  double gamma = 0.0;  // RBF width; 0 selects 1 / dimension
  double tolerance = 1e-3;
  long max_iterations = 1'000'000;
  int platt_folds = 3;
};

/// C-SVC with an RBF kernel, trained by SMO with second-order working-set
/// selection. Labels are +1 / -1.
class KernelSvm {
 public:
  static KernelSvm train(Eigen::MatrixXd inputs, const Eigen::VectorXd& labels,
                         const SvmOptions& options);

  /// sum_i alpha_i y_i K(x_i, x) - rho
  double decision(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  const Eigen::VectorXd& alphas() const { return alphas_; }
  double rho() const { return rho_; }
  double gamma() const { return gamma_; }
  double c() const { return c_; }
  /// Maximal violating-pair gap m(alpha) - M(alpha) at termination.
  double kkt_gap() const { return kkt_gap_; }
  long iterations() const { return iterations_; }

 private:
  KernelSvm() = default;

  Eigen::MatrixXd inputs_;
  Eigen::VectorXd labels_;
  Eigen::VectorXd alphas_;
  double rho_ = 0.0;
  double gamma_ = 1.0;
  double c_ = 1.0;
  double kkt_gap_ = 0.0;
  long iterations_ = 0;
};

/// Sigmoid P(+1 | f) = 1 / (1 + exp(a f + b)).
struct PlattSigmoid {
  double a = 0.0;
  double b = 0.0;

  double operator()(double decision) const;
};

/// Maximum-likelihood fit of the sigmoid with Platt's regularized targets,
/// by Newton's method with backtracking.
PlattSigmoid fit_platt(std::span<const double> decisions, std::span<const double> labels);

/// SVM plus a Platt sigmoid fitted on cross-validated decision values.
class CalibratedSvm {
 public:
  static CalibratedSvm train(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& labels,
                             const SvmOptions& options, Rng& rng);

  double decision(const Eigen::Ref<const Eigen::VectorXd>& x) const { return svm_.decision(x); }
  double probability(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  const KernelSvm& svm() const { return svm_; }
  const PlattSigmoid& sigmoid() const { return sigmoid_; }

 private:
  CalibratedSvm(KernelSvm svm, PlattSigmoid sigmoid)
      : svm_(std::move(svm)), sigmoid_(sigmoid) {}

  KernelSvm svm_;
  PlattSigmoid sigmoid_;
};

}  // namespace altune
