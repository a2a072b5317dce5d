#include "altune/classifiers.hpp"

#include <algorithm>
#include <stdexcept>

#include "altune/errors.hpp"

namespace altune {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double clip(double p) { return std::clamp(p, kMinProbability, 1.0 - kMinProbability); }

Eigen::VectorXd signed_labels(const std::vector<Preference>& labels) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i)
    y[static_cast<Eigen::Index>(i)] = labels[i] == Preference::better ? 1.0 : -1.0;
  return y;
}

}  // namespace

const char* to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::gp: return "gp";
    case ClassifierKind::ksvm: return "ksvm";
    case ClassifierKind::mlp: return "mlp";
  }
  return "?";
}

ClassifierKind parse_classifier_kind(const std::string& name) {
  for (auto k : {ClassifierKind::gp, ClassifierKind::ksvm, ClassifierKind::mlp})
    if (name == to_string(k)) return k;
  throw std::invalid_argument("unknown classifier '" + name + "'");
}

LabeledSet LabeledSet::with(const Eigen::Ref<const Eigen::VectorXd>& x, Preference label) const {
  LabeledSet out;
  out.inputs.resize(inputs.rows() + 1, x.size());
  if (inputs.rows() > 0) out.inputs.topRows(inputs.rows()) = inputs;
  out.inputs.row(inputs.rows()) = x.transpose();
  out.labels = labels;
  out.labels.push_back(label);
  return out;
}

double ClassifierModel::predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (!probabilistic())
    throw UnsupportedCapability(std::string(to_string(kind_)) +
                                " model does not produce probabilistic predictions");
  return std::visit(
      Overloaded{
          [](const ConstantLabel& c) {
            return c.label == Preference::better ? kFallbackProbability : 1.0 - kFallbackProbability;
          },
          [&](const GpClassifier& m) { return clip(m.probability(x)); },
          [&](const CalibratedSvm& m) { return clip(m.probability(x)); },
          [](const Mlp&) -> double { throw UnsupportedCapability("mlp"); },
      },
      state_);
}

Preference ClassifierModel::predict_label(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (const auto* c = std::get_if<ConstantLabel>(&state_)) return c->label;
  if (const auto* net = std::get_if<Mlp>(&state_))
    return net->predict(x) == 1 ? Preference::better : Preference::worse;
  return predict_proba(x) >= 0.5 ? Preference::better : Preference::worse;
}

ClassifierModel fit_classifier(const ClassifierConfig& config, const LabeledSet& train, Rng& rng) {
  if (train.size() == 0) throw std::invalid_argument("fit_classifier: empty training set");
  if (static_cast<std::size_t>(train.inputs.rows()) != train.size())
    throw std::invalid_argument("fit_classifier: inputs and labels differ in length");

  const auto better = static_cast<std::size_t>(
      std::count(train.labels.begin(), train.labels.end(), Preference::better));
  if (better == 0 || better == train.size())
    return ClassifierModel(config.kind, ClassifierModel::ConstantLabel{train.labels.front()});

  switch (config.kind) {
    case ClassifierKind::gp: {
      KernelParams kernel = config.gp_kernel;
      if (kernel.length_scales.size() == 0)
        kernel.length_scales = KernelParams::defaults(train.inputs.cols()).length_scales;
      return ClassifierModel(ClassifierKind::gp,
                             GpClassifier::fit(train.inputs, signed_labels(train.labels), kernel, config.gp));
    }
    case ClassifierKind::ksvm:
      return ClassifierModel(ClassifierKind::ksvm,
                             CalibratedSvm::train(train.inputs, signed_labels(train.labels), config.ksvm, rng));
    case ClassifierKind::mlp: {
      std::vector<int> y(train.size());
      for (std::size_t i = 0; i < train.size(); ++i) y[i] = train.labels[i] == Preference::better ? 1 : 0;
      return ClassifierModel(ClassifierKind::mlp, fit_mlp(train.inputs, y, config.mlp, rng));
    }
  }
  throw std::logic_error("fit_classifier: unhandled kind");
}

ConfusionCounts confusion(std::span<const Preference> predictions, std::span<const Preference> truths) {
  if (predictions.size() != truths.size())
    throw std::invalid_argument("confusion: predictions and truths differ in length");
  if (predictions.empty()) throw std::invalid_argument("confusion: empty input");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool pred = predictions[i] == Preference::better;
    const bool truth = truths[i] == Preference::better;
    if (pred && truth) ++c.tp;
    else if (pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double f1_score(const ConfusionCounts& c) {
  // 2PR/(P+R) simplifies to 2tp / (2tp + fp + fn).
  const double denom = 2.0 * static_cast<double>(c.tp) + static_cast<double>(c.fp + c.fn);
  return c.tp == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / denom;
}

double f1_score(std::span<const Preference> predictions, std::span<const Preference> truths) {
  return f1_score(confusion(predictions, truths));
}

}  // namespace altune
