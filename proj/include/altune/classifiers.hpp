#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "altune/design_space.hpp"
#include "altune/gp_classifier.hpp"
#include "altune/kernel_svm.hpp"
#include "altune/mlp.hpp"
#include "altune/rng.hpp"

namespace altune {

enum class ClassifierKind { gp, ksvm, mlp };

const char* to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(const std::string& name);

/// Probabilities are clipped to [kMinProbability, 1 - kMinProbability].
inline constexpr double kMinProbability = 1e-6;
/// Probability a constant-label fallback assigns to its sole class.
inline constexpr double kFallbackProbability = 0.99;

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::gp;
  /// Length scales may be left empty; they then default per input dimension.
  KernelParams gp_kernel{1.0, {}, 0.1};
  GpClassifierOptions gp;
  SvmOptions ksvm;
  MlpOptions mlp;
};

/// Inputs (one unit-cube row per sample) with their preference labels.
struct LabeledSet {
  Eigen::MatrixXd inputs;
  std::vector<Preference> labels;

  std::size_t size() const { return labels.size(); }
  /// Copy with (x, label) appended as the last row.
  LabeledSet with(const Eigen::Ref<const Eigen::VectorXd>& x, Preference label) const;
};

/// A fitted design model for preference prediction. gp and ksvm are
/// probabilistic; mlp only yields labels.
class ClassifierModel {
 public:
  struct ConstantLabel {
    Preference label;
  };
  using State = std::variant<ConstantLabel, GpClassifier, CalibratedSvm, Mlp>;

  ClassifierModel(ClassifierKind kind, State state) : kind_(kind), state_(std::move(state)) {}

  ClassifierKind kind() const { return kind_; }
  bool probabilistic() const { return kind_ != ClassifierKind::mlp; }
  /// True when training data held a single class and the model predicts it.
  bool constant_fallback() const { return std::holds_alternative<ConstantLabel>(state_); }

  /// P("better" | x), clipped to [1e-6, 1 - 1e-6]. Throws
  /// UnsupportedCapability for mlp models.
  double predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// p >= 0.5 means "better" for probabilistic kinds; argmax output for mlp.
  Preference predict_label(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  const State& state() const { return state_; }

 private:
  ClassifierKind kind_;
  State state_;
};

/// Trains the configured kind. Deterministic given the rng state. A
/// single-class training set yields a constant-label model instead of an error.
ClassifierModel fit_classifier(const ClassifierConfig& config, const LabeledSet& train, Rng& rng);

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
};

/// Counts over the positive class "better". Throws on empty or unequal input.
ConfusionCounts confusion(std::span<const Preference> predictions, std::span<const Preference> truths);

/// F1 of the "better" class; 0 when precision + recall is 0.
double f1_score(std::span<const Preference> predictions, std::span<const Preference> truths);
double f1_score(const ConfusionCounts& counts);

}  // namespace altune
