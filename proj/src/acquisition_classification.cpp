#include "altune/acquisition_classification.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "altune/acquisition_regression.hpp"
#include "altune/errors.hpp"

namespace altune {

namespace {

constexpr ClassificationStrategyKind kAllKinds[] = {
    ClassificationStrategyKind::random,          ClassificationStrategyKind::entropy,
    ClassificationStrategyKind::qbb_vote,        ClassificationStrategyKind::qbb_prob,
    ClassificationStrategyKind::error_reduction, ClassificationStrategyKind::variance_reduction};

}  // namespace

const char* to_string(ClassificationStrategyKind kind) {
  switch (kind) {
    case ClassificationStrategyKind::random: return "random";
    case ClassificationStrategyKind::entropy: return "entropy";
    case ClassificationStrategyKind::qbb_vote: return "qbb_vote";
    case ClassificationStrategyKind::qbb_prob: return "qbb_prob";
    case ClassificationStrategyKind::error_reduction: return "error_reduction";
    case ClassificationStrategyKind::variance_reduction: return "variance_reduction";
  }
  return "?";
}

ClassificationStrategyKind parse_classification_strategy(const std::string& name) {
  for (auto k : kAllKinds)
    if (name == to_string(k)) return k;
  throw std::invalid_argument("unknown classification strategy '" + name + "'");
}

const char* to_string(QbbVoteMode mode) {
  return mode == QbbVoteMode::vote_entropy ? "vote_entropy" : "literal_margin";
}

QbbVoteMode parse_qbb_vote_mode(const std::string& name) {
  if (name == "vote_entropy") return QbbVoteMode::vote_entropy;
  if (name == "literal_margin") return QbbVoteMode::literal_margin;
  throw std::invalid_argument("qbb_vote mode must be vote_entropy or literal_margin, got '" + name + "'");
}

bool requires_probabilities(ClassificationStrategyKind kind) {
  switch (kind) {
    case ClassificationStrategyKind::entropy:
    case ClassificationStrategyKind::qbb_prob:
    case ClassificationStrategyKind::error_reduction:
    case ClassificationStrategyKind::variance_reduction:
      return true;
    default:
      return false;
  }
}

void ClassificationStrategy::validate() const {
  if (bag_count < 2) throw std::invalid_argument("bag_count must be at least 2");
  if (!(bag_fraction > 0.0)) throw std::invalid_argument("bag_fraction must be positive");
  if (eer_pool_subsample < 1) throw std::invalid_argument("eer_pool_subsample must be at least 1");
}

Committee build_committee(const ClassifierConfig& config, const LabeledSet& train,
                          std::size_t bag_count, double bag_fraction, Rng& rng) {
  if (train.size() == 0) throw std::invalid_argument("build_committee: empty training set");
  if (bag_count < 2) throw std::invalid_argument("build_committee: bag_count must be at least 2");
  const std::uint64_t base = rng();
  const auto n = train.size();
  const auto bag = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(bag_fraction * static_cast<double>(n))));

  Committee committee;
  committee.members.reserve(bag_count);
  for (std::size_t m = 0; m < bag_count; ++m) {
    Rng member_rng(derive_seed(base, {m}));
    LabeledSet sample;
    sample.inputs.resize(static_cast<Eigen::Index>(bag), train.inputs.cols());
    sample.labels.resize(bag);
    for (std::size_t i = 0; i < bag; ++i) {
      const std::size_t pick = uniform_index(member_rng, n);
      sample.inputs.row(static_cast<Eigen::Index>(i)) = train.inputs.row(static_cast<Eigen::Index>(pick));
      sample.labels[i] = train.labels[pick];
    }
    committee.members.push_back(fit_classifier(config, sample, member_rng));
  }
  return committee;
}

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
  return h;
}

double vote_entropy(std::size_t better_votes, std::size_t members) {
  if (members == 0) throw std::invalid_argument("vote_entropy: no members");
  return binary_entropy(static_cast<double>(better_votes) / static_cast<double>(members));
}

double entropy_score(const ClassifierModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return binary_entropy(model.predict_proba(x));
}

double qbb_vote_score(const Committee& committee, const Eigen::Ref<const Eigen::VectorXd>& x,
                      QbbVoteMode mode) {
  const std::size_t m = committee.members.size();
  std::size_t better = 0;
  for (const auto& member : committee.members)
    if (member.predict_label(x) == Preference::better) ++better;
  if (mode == QbbVoteMode::vote_entropy) return vote_entropy(better, m);
  const double worse = static_cast<double>(m - better);
  return std::abs(static_cast<double>(better) - worse) / static_cast<double>(m);
}

double qbb_prob_score(const Committee& committee, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (committee.members.empty()) throw std::invalid_argument("qbb_prob_score: empty committee");
  double sum = 0.0;
  for (const auto& member : committee.members) sum += binary_entropy(member.predict_proba(x));
  return sum / static_cast<double>(committee.members.size());
}

double future_reduction_score(const ClassifierConfig& config, const LabeledSet& train,
                              const ClassifierModel& current,
                              const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::MatrixXd& evaluation, std::uint64_t retrain_seed,
                              FutureQuantity quantity) {
  const double p_better = current.predict_proba(x);
  double expected = 0.0;
  for (const Preference label : {Preference::better, Preference::worse}) {
    const double weight = label == Preference::better ? p_better : 1.0 - p_better;
    Rng rng(retrain_seed);
    const ClassifierModel retrained = fit_classifier(config, train.with(x, label), rng);
    double total = 0.0;
    for (Eigen::Index u = 0; u < evaluation.rows(); ++u) {
      const double p = retrained.predict_proba(evaluation.row(u).transpose());
      total += quantity == FutureQuantity::error ? 1.0 - std::max(p, 1.0 - p) : p * (1.0 - p);
    }
    if (quantity == FutureQuantity::variance && evaluation.rows() > 0)
      total /= static_cast<double>(evaluation.rows());
    expected += weight * total;
  }
  return -expected;
}

std::vector<double> score_candidates(const ClassificationStrategy& strategy,
                                     const ClassifierConfig& config, const ClassifierModel& model,
                                     const LabeledSet& train, const Eigen::MatrixXd& candidates,
                                     std::span<const std::size_t> unused, Rng& rng) {
  if (requires_probabilities(strategy.kind) && !model.probabilistic())
    throw UnsupportedCapability(std::string(to_string(strategy.kind)) + " needs probabilities; " +
                                to_string(model.kind()) + " does not provide them");

  auto row = [&](std::size_t idx) { return candidates.row(static_cast<Eigen::Index>(idx)).transpose(); };
  std::vector<double> scores(unused.size(), 0.0);
  switch (strategy.kind) {
    case ClassificationStrategyKind::random:
      break;
    case ClassificationStrategyKind::entropy:
      for (std::size_t i = 0; i < unused.size(); ++i) scores[i] = entropy_score(model, row(unused[i]));
      break;
    case ClassificationStrategyKind::qbb_vote:
    case ClassificationStrategyKind::qbb_prob: {
      const Committee committee =
          build_committee(config, train, strategy.bag_count, strategy.bag_fraction, rng);
      for (std::size_t i = 0; i < unused.size(); ++i) {
        scores[i] = strategy.kind == ClassificationStrategyKind::qbb_vote
                        ? qbb_vote_score(committee, row(unused[i]), strategy.qbb_vote)
                        : qbb_prob_score(committee, row(unused[i]));
      }
      break;
    }
    case ClassificationStrategyKind::error_reduction:
    case ClassificationStrategyKind::variance_reduction: {
      std::vector<std::size_t> eval_idx(unused.begin(), unused.end());
      if (strategy.eer_pool_subsample < eval_idx.size()) {
        for (std::size_t i = 0; i < strategy.eer_pool_subsample; ++i)
          std::swap(eval_idx[i], eval_idx[i + uniform_index(rng, eval_idx.size() - i)]);
        eval_idx.resize(strategy.eer_pool_subsample);
        std::sort(eval_idx.begin(), eval_idx.end());
      }
      Eigen::MatrixXd evaluation(static_cast<Eigen::Index>(eval_idx.size()), candidates.cols());
      for (std::size_t i = 0; i < eval_idx.size(); ++i)
        evaluation.row(static_cast<Eigen::Index>(i)) = candidates.row(static_cast<Eigen::Index>(eval_idx[i]));
      const std::uint64_t retrain_seed = rng();
      const auto quantity = strategy.kind == ClassificationStrategyKind::error_reduction
                                ? FutureQuantity::error
                                : FutureQuantity::variance;
      for (std::size_t i = 0; i < unused.size(); ++i)
        scores[i] = future_reduction_score(config, train, model, row(unused[i]), evaluation,
                                           retrain_seed, quantity);
      break;
    }
  }
  return scores;
}

std::size_t select_next(const ClassificationStrategy& strategy, const ClassifierConfig& config,
                        const ClassifierModel& model, const LabeledSet& train,
                        const Eigen::MatrixXd& candidates, std::span<const std::size_t> unused,
                        Rng& rng) {
  if (unused.empty()) throw std::logic_error("select_next: pool exhausted");
  if (strategy.kind == ClassificationStrategyKind::random)
    return unused[uniform_index(rng, unused.size())];
  const auto scores = score_candidates(strategy, config, model, train, candidates, unused, rng);
  return argmax_with_ties(scores, unused, rng);
}

}  // namespace altune
