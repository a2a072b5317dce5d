#include "altune/acquisition_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace altune {

namespace {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Probability mass of (alpha, beta) under the standard normal, computed on the
// tail that keeps precision.
double normal_interval(double alpha, double beta) {
  if (alpha > 0.0) return normal_cdf(-alpha) - normal_cdf(-beta);
  return normal_cdf(beta) - normal_cdf(alpha);
}

}  // namespace

const char* to_string(RegressionStrategyKind kind) {
  switch (kind) {
    case RegressionStrategyKind::random: return "random";
    case RegressionStrategyKind::variance: return "variance";
    case RegressionStrategyKind::pi: return "pi";
    case RegressionStrategyKind::ei: return "ei";
    case RegressionStrategyKind::ucb: return "ucb";
  }
  return "?";
}

RegressionStrategyKind parse_regression_strategy(const std::string& name) {
  for (auto k : {RegressionStrategyKind::random, RegressionStrategyKind::variance,
                 RegressionStrategyKind::pi, RegressionStrategyKind::ei, RegressionStrategyKind::ucb})
    if (name == to_string(k)) return k;
  throw std::invalid_argument("unknown regression strategy '" + name + "'");
}

void RegressionStrategy::validate() const {
  if (!(xi >= 0.0)) throw std::invalid_argument("xi must be non-negative");
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be non-negative");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

Incumbent Incumbent::from_hits(std::span<const double> hits, const RegressionObjective& objective) {
  if (hits.empty()) throw std::invalid_argument("Incumbent: no observations");
  Incumbent inc{objective_loss(hits.front(), objective)};
  for (double h : hits.subspan(1)) inc.observe(h, objective);
  return inc;
}

void Incumbent::observe(double hits, const RegressionObjective& objective) {
  best_loss = std::min(best_loss, objective_loss(hits, objective));
}

LossMoments loss_moments(double mean, double sd, double target) {
  const double m = mean - target;
  const double s2 = sd * sd;
  return {m * m + s2, std::sqrt(4.0 * m * m * s2 + 2.0 * s2 * s2)};
}

double probability_of_improvement(double mean, double sd, double target, double best_loss,
                                  double xi) {
  const double c = best_loss - xi;
  if (sd <= 0.0 || c <= 0.0) return 0.0;
  const double r = std::sqrt(c);
  const double m = mean - target;
  return std::clamp(normal_interval((-r - m) / sd, (r - m) / sd), 0.0, 1.0);
}

double expected_improvement(double mean, double sd, double target, double best_loss, double xi) {
  const double c = best_loss - xi;
  const double m = mean - target;
  if (sd <= 0.0) return std::max(c - m * m, 0.0);
  if (c <= 0.0) return 0.0;
  const double r = std::sqrt(c);
  const double a = (-r - m) / sd;
  const double b = (r - m) / sd;
  const double p = normal_interval(a, b);
  const double pa = normal_pdf(a);
  const double pb = normal_pdf(b);
  // E[D^2 ; -r < D < r] for D = m + sd Z.
  const double second = m * m * p + 2.0 * m * sd * (pa - pb) + sd * sd * (p + a * pa - b * pb);
  return std::max(c * p - second, 0.0);
}

double effective_kappa(const RegressionStrategy& strategy, std::size_t step, std::size_t pool_size) {
  if (strategy.kappa_schedule == KappaSchedule::constant) return strategy.kappa;
  const double t = static_cast<double>(std::max<std::size_t>(step, 1));
  const double d = static_cast<double>(std::max<std::size_t>(pool_size, 1));
  const double beta =
      2.0 * std::log(d * t * t * std::numbers::pi * std::numbers::pi / (6.0 * strategy.delta));
  return std::sqrt(std::max(beta, 0.0));
}

double score_prediction(const RegressionStrategy& strategy, const GpPrediction& prediction,
                        const Incumbent& incumbent, const RegressionObjective& objective,
                        double output_scale, double kappa) {
  const double sd = std::sqrt(std::max(prediction.variance, 0.0));
  const double xi = strategy.xi * output_scale * output_scale;
  switch (strategy.kind) {
    case RegressionStrategyKind::random:
      return 0.0;
    case RegressionStrategyKind::variance:
      return prediction.variance;
    case RegressionStrategyKind::pi:
      return probability_of_improvement(prediction.mean, sd, objective.target_hits,
                                        incumbent.best_loss, xi);
    case RegressionStrategyKind::ei:
      return expected_improvement(prediction.mean, sd, objective.target_hits, incumbent.best_loss,
                                  xi);
    case RegressionStrategyKind::ucb: {
      const LossMoments lm = loss_moments(prediction.mean, sd, objective.target_hits);
      return -(lm.mean - kappa * lm.sd);
    }
  }
  return 0.0;
}

double score(const RegressionStrategy& strategy, const GPModel& model,
             const Eigen::Ref<const Eigen::VectorXd>& candidate, const Incumbent& incumbent,
             const RegressionObjective& objective, std::size_t step, std::size_t pool_size) {
  return score_prediction(strategy, model.predict(candidate), incumbent, objective,
                          model.target_scale(), effective_kappa(strategy, step, pool_size));
}

std::size_t argmax_with_ties(std::span<const double> scores, std::span<const std::size_t> indices,
                             Rng& rng) {
  if (indices.empty()) throw std::logic_error("select_next: pool exhausted");
  if (scores.size() != indices.size())
    throw std::invalid_argument("argmax_with_ties: scores and indices differ in length");
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = std::isnan(scores[i]) ? -std::numeric_limits<double>::infinity() : scores[i];
    if (s > best) {
      best = s;
      ties.assign(1, indices[i]);
    } else if (s == best) {
      ties.push_back(indices[i]);
    }
  }
  return ties.size() == 1 ? ties.front() : ties[uniform_index(rng, ties.size())];
}

std::size_t select_next(const RegressionStrategy& strategy, const GPModel& model,
                        const Eigen::MatrixXd& candidates, std::span<const std::size_t> unused,
                        const Incumbent& incumbent, const RegressionObjective& objective,
                        Rng& rng, std::size_t step) {
  if (unused.empty()) throw std::logic_error("select_next: pool exhausted");
  if (strategy.kind == RegressionStrategyKind::random) return unused[uniform_index(rng, unused.size())];

  Eigen::MatrixXd rows(static_cast<Eigen::Index>(unused.size()), candidates.cols());
  for (std::size_t i = 0; i < unused.size(); ++i)
    rows.row(static_cast<Eigen::Index>(i)) = candidates.row(static_cast<Eigen::Index>(unused[i]));
  const GpBatchPrediction pred = model.predict_batch(rows);
  const double kappa = effective_kappa(strategy, step, static_cast<std::size_t>(candidates.rows()));

  std::vector<double> scores(unused.size());
  for (std::size_t i = 0; i < unused.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    scores[i] = score_prediction(strategy, {pred.mean[e], pred.variance[e]}, incumbent, objective,
                                 model.target_scale(), kappa);
  }
  return argmax_with_ties(scores, unused, rng);
}

std::size_t select_next(const RegressionStrategy& strategy, const GPModel& model,
                        const SamplePool<RegressionSample>& pool, const ParameterSpace& space,
                        const Incumbent& incumbent, const RegressionObjective& objective,
                        Rng& rng, std::size_t step) {
  Eigen::MatrixXd candidates(static_cast<Eigen::Index>(pool.size()),
                             static_cast<Eigen::Index>(space.dimension()));
  for (std::size_t i = 0; i < pool.size(); ++i)
    candidates.row(static_cast<Eigen::Index>(i)) = space.normalize(pool.peek(i).point).transpose();
  const auto unused = pool.unused_indices();
  return select_next(strategy, model, candidates, unused, incumbent, objective, rng, step);
}

}  // namespace altune
