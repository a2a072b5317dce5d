#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "altune/design_space.hpp"
#include "altune/gp_regression.hpp"
#include "altune/rng.hpp"

namespace altune {

enum class RegressionStrategyKind { random, variance, pi, ei, ucb };
enum class KappaSchedule { constant, srinivas };

const char* to_string(RegressionStrategyKind kind);
RegressionStrategyKind parse_regression_strategy(const std::string& name);

struct RegressionStrategy {
  RegressionStrategyKind kind = RegressionStrategyKind::ucb;
  /// Improvement margin, in units of the squared output scale of the model.
  double xi = 0.01;
  double kappa = 2.0;
  KappaSchedule kappa_schedule = KappaSchedule::constant;
  double delta = 0.1;  // confidence parameter of the srinivas schedule

  void validate() const;
};

/// Lowest objective loss among the observed training outputs.
struct Incumbent {
  double best_loss = 0.0;

  static Incumbent from_hits(std::span<const double> hits, const RegressionObjective& objective);
  /// Monotone update; never raises best_loss.
  void observe(double hits, const RegressionObjective& objective);
};

/// Moments of L = (H - t)^2 for H ~ Normal(mean, sd^2): noncentral chi-square.
struct LossMoments {
  double mean = 0.0;
  double sd = 0.0;
};
LossMoments loss_moments(double mean, double sd, double target);

/// P(L < best_loss - xi) for L = (H - t)^2, H ~ Normal(mean, sd^2).
/// Zero when sd == 0.
double probability_of_improvement(double mean, double sd, double target, double best_loss,
                                  double xi);

/// E[max(best_loss - xi - L, 0)] for L = (H - t)^2, H ~ Normal(mean, sd^2),
/// evaluated in closed form. With sd == 0 it reduces to max(best - xi - mu_L, 0).
double expected_improvement(double mean, double sd, double target, double best_loss, double xi);

/// Exploration weight in effect at acquisition step `step` (1-based) for a
/// pool of `pool_size` candidates.
double effective_kappa(const RegressionStrategy& strategy, std::size_t step, std::size_t pool_size);

/// Score of one candidate given its predictive hit distribution. Higher is
/// more desirable. `kappa` is the already-resolved exploration weight.
double score_prediction(const RegressionStrategy& strategy, const GpPrediction& prediction,
                        const Incumbent& incumbent, const RegressionObjective& objective,
                        double output_scale, double kappa);

/// Scores a unit-cube candidate under `model`.
double score(const RegressionStrategy& strategy, const GPModel& model,
             const Eigen::Ref<const Eigen::VectorXd>& candidate, const Incumbent& incumbent,
             const RegressionObjective& objective, std::size_t step = 1, std::size_t pool_size = 1);

/// Index (into `candidates`' rows) of the maximal score among `unused`;
/// ties broken uniformly with `rng`. The random strategy ignores the model.
/// Throws std::logic_error when `unused` is empty.
std::size_t select_next(const RegressionStrategy& strategy, const GPModel& model,
                        const Eigen::MatrixXd& candidates, std::span<const std::size_t> unused,
                        const Incumbent& incumbent, const RegressionObjective& objective,
                        Rng& rng, std::size_t step = 1);

/// Pool-level overload: candidates are the pool's design points mapped by `space`.
std::size_t select_next(const RegressionStrategy& strategy, const GPModel& model,
                        const SamplePool<RegressionSample>& pool, const ParameterSpace& space,
                        const Incumbent& incumbent, const RegressionObjective& objective,
                        Rng& rng, std::size_t step = 1);

/// Uniform choice among the indices attaining the maximal score.
/// `scores[i]` belongs to `indices[i]`.
std::size_t argmax_with_ties(std::span<const double> scores, std::span<const std::size_t> indices,
                             Rng& rng);

}  // namespace altune
