#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "altune/classifiers.hpp"
#include "altune/rng.hpp"

namespace altune {

enum class ClassificationStrategyKind {
  random,
  entropy,
  qbb_vote,
  qbb_prob,
  error_reduction,
  variance_reduction
};

/// vote_entropy: maximal committee disagreement. literal_margin: the largest
/// gap between the top two vote counts.
enum class QbbVoteMode { vote_entropy, literal_margin };

const char* to_string(ClassificationStrategyKind kind);
ClassificationStrategyKind parse_classification_strategy(const std::string& name);
const char* to_string(QbbVoteMode mode);
QbbVoteMode parse_qbb_vote_mode(const std::string& name);

/// True for the strategies that need predict_proba.
bool requires_probabilities(ClassificationStrategyKind kind);

struct ClassificationStrategy {
  ClassificationStrategyKind kind = ClassificationStrategyKind::qbb_vote;
  std::size_t bag_count = 7;
  double bag_fraction = 1.0;
  std::size_t eer_pool_subsample = 100;
  QbbVoteMode qbb_vote = QbbVoteMode::vote_entropy;

  void validate() const;
};

struct Committee {
  std::vector<ClassifierModel> members;
};

/// Each member is trained on a bootstrap resample of round(bag_fraction * n)
/// samples drawn with replacement. Member rng streams are derived from one
/// draw of `rng` and the member index.
Committee build_committee(const ClassifierConfig& config, const LabeledSet& train,
                          std::size_t bag_count, double bag_fraction, Rng& rng);

/// -p ln p - (1 - p) ln(1 - p), in nats; 0 at p in {0, 1}.
double binary_entropy(double p);
/// Entropy of the vote split `better_votes` / `members`.
double vote_entropy(std::size_t better_votes, std::size_t members);

double entropy_score(const ClassifierModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
double qbb_vote_score(const Committee& committee, const Eigen::Ref<const Eigen::VectorXd>& x,
                      QbbVoteMode mode = QbbVoteMode::vote_entropy);
/// Mean member entropy.
double qbb_prob_score(const Committee& committee, const Eigen::Ref<const Eigen::VectorXd>& x);

enum class FutureQuantity { error, variance };

/// Expected future error (sum over `evaluation` of 1 - max_y p(y|u)) or mean
/// future variance p(1 - p), after retraining on train + {(x, y)} for each
/// label y weighted by the current model's p(y|x). Every retrain starts from
/// `retrain_seed`. Returns the negated expectation, so higher is better.
double future_reduction_score(const ClassifierConfig& config, const LabeledSet& train,
                              const ClassifierModel& current,
                              const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::MatrixXd& evaluation, std::uint64_t retrain_seed,
                              FutureQuantity quantity);

/// Scores of the `unused` rows of `candidates` (higher is better). Committees,
/// evaluation subsamples and retraining seeds are drawn from `rng`. Throws
/// UnsupportedCapability for a probabilistic strategy on a non-probabilistic
/// model. The random strategy scores everything 0.
std::vector<double> score_candidates(const ClassificationStrategy& strategy,
                                     const ClassifierConfig& config, const ClassifierModel& model,
                                     const LabeledSet& train, const Eigen::MatrixXd& candidates,
                                     std::span<const std::size_t> unused, Rng& rng);

/// Argmax over `unused` with seeded uniform tie-breaking; the random strategy
/// draws uniformly. Throws std::logic_error when `unused` is empty.
std::size_t select_next(const ClassificationStrategy& strategy, const ClassifierConfig& config,
                        const ClassifierModel& model, const LabeledSet& train,
                        const Eigen::MatrixXd& candidates, std::span<const std::size_t> unused,
                        Rng& rng);

}  // namespace altune
