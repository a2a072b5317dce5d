#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "altune/rng.hpp"

namespace altune {

struct MlpOptions {
  std::vector<int> hidden_candidates{4, 8, 16};
  double learning_rate = 0.5;
  int epochs = 300;
  double weight_decay = 1e-4;
  double validation_fraction = 0.2;
};

/// One-hidden-layer tanh network with two softmax outputs, trained by
/// full-batch gradient descent. The step size is halved whenever a step would
/// raise the training loss, so the recorded loss never increases.
class Mlp {
 public:
  /// `labels` are 0 / 1 class indices.
  static Mlp train(const Eigen::MatrixXd& inputs, const std::vector<int>& labels, int hidden,
                   const MlpOptions& options, Rng& rng);

  /// Output-unit activations (softmax), index 1 is the positive class.
  std::array<double, 2> outputs(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  int hidden_size() const { return static_cast<int>(w1_.rows()); }
  /// Training loss before the first epoch and after each accepted epoch.
  const std::vector<double>& loss_history() const { return loss_history_; }

 private:
  Eigen::MatrixXd w1_;  // hidden x inputs
  Eigen::VectorXd b1_;
  Eigen::MatrixXd w2_;  // 2 x hidden
  Eigen::VectorXd b2_;
  std::vector<double> loss_history_;
};

/// Picks the hidden size by held-in validation accuracy (ties go to the
/// smaller network), then retrains on all samples.
Mlp fit_mlp(const Eigen::MatrixXd& inputs, const std::vector<int>& labels, const MlpOptions& options,
            Rng& rng);

}  // namespace altune
