#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "altune/rng.hpp"

namespace altune {

/// Hyperparameters of the ARD squared-exponential kernel
///   k(a, b) = signal_variance * exp(-0.5 * sum_d (a_d - b_d)^2 / l_d^2)
/// plus i.i.d. observation noise. Values are in standardized target units.
struct KernelParams {
  double signal_variance = 1.0;
  Eigen::VectorXd length_scales;
  double noise_variance = 0.1;

  static KernelParams defaults(Eigen::Index dimension);
  /// Throws std::invalid_argument unless every entry is strictly positive and
  /// there is one length scale per input dimension.
  void validate(Eigen::Index dimension) const;
};

/// Throws std::invalid_argument on a dimension mismatch.
double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b, const KernelParams& k);

/// Cross covariance between the rows of `a` and the rows of `b` (no noise term).
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const KernelParams& k);

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;  // latent function variance, raw output units
};

struct GpBatchPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

/// Exact GP regression on unit-cube inputs. Targets are standardized to zero
/// mean and unit variance before fitting; predictions are reported in the
/// original units. A fitted model is immutable.
class GPModel {
 public:
  /// `inputs` holds one sample per row. Throws std::invalid_argument on empty or
  /// mismatched data and FactorizationError when the kernel matrix stays
  /// indefinite after jitter escalation (1e-10 up to 1e-6).
  static GPModel fit(Eigen::MatrixXd inputs, const Eigen::VectorXd& targets,
                     const KernelParams& kernel);

  GpPrediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  GpBatchPrediction predict_batch(const Eigen::MatrixXd& queries) const;

  /// -1/2 y^T alpha - sum log diag(L) - n/2 log(2 pi), standardized targets.
  double log_marginal_likelihood() const;

  Eigen::Index size() const { return inputs_.rows(); }
  Eigen::Index dimension() const { return inputs_.cols(); }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& standardized_targets() const { return targets_; }
  const KernelParams& kernel() const { return kernel_; }
  double target_mean() const { return target_mean_; }
  double target_scale() const { return target_scale_; }
  double jitter() const { return jitter_; }

 private:
  GPModel() = default;

  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  KernelParams kernel_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  Eigen::VectorXd alpha_;
  double target_mean_ = 0.0;
  double target_scale_ = 1.0;
  double jitter_ = 0.0;
};

struct HyperparamSearch {
  int restarts = 2;
  int max_iterations = 60;
};

struct HyperparamResult {
  KernelParams params;
  double log_likelihood = 0.0;
  /// True when every restart failed and `params` are the safe defaults.
  bool used_fallback = false;
};

/// Multi-start L-BFGS over log hyperparameters, maximizing the log marginal
/// likelihood of the standardized targets. The first start is `initial`; the
/// others are drawn from `rng`. With zero restarts `initial` is returned
/// unchanged. Requires at least three samples.
HyperparamResult optimize_hyperparams(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                      const KernelParams& initial, const HyperparamSearch& search,
                                      Rng& rng);

}  // namespace altune
