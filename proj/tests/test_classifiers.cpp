#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "altune/classifiers.hpp"
#include "altune/errors.hpp"

using namespace altune;

namespace {

// Two tight clusters in the unit square of (drag, thrust, prev_drag, prev_thrust).
LabeledSet clusters(Rng& rng, std::size_t n) {
  LabeledSet set;
  set.inputs.resize(static_cast<Eigen::Index>(n), 4);
  for (std::size_t i = 0; i < n; ++i) {
    const bool better = i % 2 == 0;
    const double centre = better ? 0.25 : 0.75;
    for (Eigen::Index d = 0; d < 4; ++d)
      set.inputs(static_cast<Eigen::Index>(i), d) = centre + 0.2 * (uniform01(rng) - 0.5);
    set.labels.push_back(better ? Preference::better : Preference::worse);
  }
  return set;
}

double accuracy(const ClassifierModel& m, const LabeledSet& s) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (m.predict_label(s.inputs.row(static_cast<Eigen::Index>(i)).transpose()) == s.labels[i]) ++ok;
  return static_cast<double>(ok) / static_cast<double>(s.size());
}

Eigen::VectorXd signs(const LabeledSet& s) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) y[static_cast<Eigen::Index>(i)] = s.labels[i] == Preference::better ? 1.0 : -1.0;
  return y;
}

ClassifierConfig config_for(ClassifierKind kind) {
  ClassifierConfig c;
  c.kind = kind;
  return c;
}

}  // namespace

TEST_CASE("every kind separates two clusters") {
  Rng data(1);
  const auto train = clusters(data, 60);
  const auto test = clusters(data, 200);
  for (auto kind : {ClassifierKind::gp, ClassifierKind::ksvm, ClassifierKind::mlp}) {
    CAPTURE(to_string(kind));
    Rng rng(2);
    const auto model = fit_classifier(config_for(kind), train, rng);
    CHECK_FALSE(model.constant_fallback());
    CHECK(accuracy(model, train) >= 0.95);
    CHECK(accuracy(model, test) >= 0.95);
  }
}

TEST_CASE("gp probability is confident deep inside a class") {
  Rng data(3);
  const auto train = clusters(data, 40);
  Rng rng(1);
  const auto model = fit_classifier(config_for(ClassifierKind::gp), train, rng);
  CHECK(model.predict_proba(Eigen::Vector4d::Constant(0.25)) > 0.8);
  CHECK(model.predict_proba(Eigen::Vector4d::Constant(0.75)) < 0.2);
}

TEST_CASE("gp label flip maps p to 1 - p") {
  Rng data(4);
  auto train = clusters(data, 30);
  for (std::size_t i = 0; i < 6; ++i) train.labels[i] = train.labels[i] == Preference::better ? Preference::worse : Preference::better;
  LabeledSet flipped = train;
  for (auto& l : flipped.labels) l = l == Preference::better ? Preference::worse : Preference::better;
  Rng a(1), b(1);
  const auto m = fit_classifier(config_for(ClassifierKind::gp), train, a);
  const auto f = fit_classifier(config_for(ClassifierKind::gp), flipped, b);
  Rng probe(5);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector4d x(uniform01(probe), uniform01(probe), uniform01(probe), uniform01(probe));
    CHECK(std::abs(m.predict_proba(x) - (1.0 - f.predict_proba(x))) < 1e-6);
  }
}

TEST_CASE("gp Laplace iteration converges") {
  Rng data(6);
  const auto train = clusters(data, 50);
  const auto gpc = GpClassifier::fit(train.inputs, signs(train), KernelParams::defaults(4));
  CHECK(gpc.converged());
  CHECK(gpc.iterations() <= 50);
  CHECK(gpc.latent_variance(Eigen::Vector4d::Constant(0.5)) >= 0.0);
}

TEST_CASE("ksvm satisfies its box and KKT conditions") {
  Rng data(7);
  LabeledSet train = clusters(data, 80);
  // Overlap some points so that a few multipliers sit at the bound.
  for (std::size_t i = 0; i < 80; i += 9) train.labels[i] = train.labels[i] == Preference::better ? Preference::worse : Preference::better;
  const SvmOptions opts;
  const auto svm = KernelSvm::train(train.inputs, signs(train), opts);
  CHECK(svm.gamma() == doctest::Approx(0.25));
  CHECK((svm.alphas().array() >= 0.0).all());
  CHECK((svm.alphas().array() <= opts.c + 1e-12).all());
  CHECK(svm.kkt_gap() <= opts.tolerance);
  CHECK(std::abs(svm.alphas().dot(signs(train))) < 1e-9);
}

TEST_CASE("ksvm decision sign is invariant to duplicating every sample") {
  Rng data(8);
  const auto train = clusters(data, 30);
  LabeledSet twice;
  twice.inputs.resize(60, 4);
  twice.inputs << train.inputs, train.inputs;
  twice.labels = train.labels;
  twice.labels.insert(twice.labels.end(), train.labels.begin(), train.labels.end());
  // Duplication doubles the effective C, so compare on the separating problem
  // where the box constraint never binds.
  SvmOptions hard;
  hard.c = 1e6;
  hard.tolerance = 1e-6;
  const auto a = KernelSvm::train(train.inputs, signs(train), hard);
  const auto b = KernelSvm::train(twice.inputs, signs(twice), hard);
  // With C halved the duplicated problem is the original one.
  SvmOptions unit;
  unit.tolerance = 1e-6;
  SvmOptions half = unit;
  half.c = 0.5;
  const auto c = KernelSvm::train(train.inputs, signs(train), unit);
  const auto d = KernelSvm::train(twice.inputs, signs(twice), half);
  Rng probe(9);
  for (int i = 0; i < 300; ++i) {
    const Eigen::Vector4d x(uniform01(probe), uniform01(probe), uniform01(probe), uniform01(probe));
    const double da = a.decision(x);
    if (std::abs(da) > 1e-3) CHECK((da > 0) == (b.decision(x) > 0));
    CHECK(d.decision(x) == doctest::Approx(c.decision(x)).epsilon(1e-3).scale(1.0));
  }
}

TEST_CASE("platt fit orients the sigmoid with the decision values") {
  const std::vector<double> dec{-2.0, -1.5, -1.0, -0.2, 0.3, 1.0, 1.4, 2.2, 0.1, -0.1};
  const std::vector<double> lab{-1, -1, -1, -1, 1, 1, 1, 1, -1, 1};
  const auto s = fit_platt(dec, lab);
  CHECK(s.a < 0.0);
  CHECK(s(3.0) > 0.9);
  CHECK(s(-3.0) < 0.1);
}

TEST_CASE("mlp training loss never increases") {
  Rng data(10);
  const auto train = clusters(data, 40);
  std::vector<int> y;
  for (auto l : train.labels) y.push_back(l == Preference::better ? 1 : 0);
  Rng rng(3);
  const auto net = Mlp::train(train.inputs, y, 8, {}, rng);
  const auto& h = net.loss_history();
  REQUIRE(h.size() > 1);
  for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] <= h[i - 1] + 1e-6);
  const auto out = net.outputs(Eigen::Vector4d::Constant(0.25));
  CHECK(out[0] + out[1] == doctest::Approx(1.0));
}

TEST_CASE("mlp hidden size comes from the candidate set") {
  Rng data(11);
  const auto train = clusters(data, 40);
  std::vector<int> y;
  for (auto l : train.labels) y.push_back(l == Preference::better ? 1 : 0);
  Rng rng(3);
  const auto net = fit_mlp(train.inputs, y, {}, rng);
  CHECK((net.hidden_size() == 4 || net.hidden_size() == 8 || net.hidden_size() == 16));
}

TEST_CASE("mlp models refuse probabilities") {
  Rng data(12);
  const auto train = clusters(data, 20);
  Rng rng(1);
  const auto model = fit_classifier(config_for(ClassifierKind::mlp), train, rng);
  CHECK_FALSE(model.probabilistic());
  CHECK_THROWS_AS(model.predict_proba(Eigen::Vector4d::Constant(0.5)), UnsupportedCapability);
  CHECK_NOTHROW(model.predict_label(Eigen::Vector4d::Constant(0.5)));
}

TEST_CASE("single-class training falls back to a constant model") {
  LabeledSet train;
  train.inputs = Eigen::MatrixXd::Constant(3, 4, 0.5);
  train.labels.assign(3, Preference::worse);
  for (auto kind : {ClassifierKind::gp, ClassifierKind::ksvm, ClassifierKind::mlp}) {
    Rng rng(1);
    const auto model = fit_classifier(config_for(kind), train, rng);
    CHECK(model.constant_fallback());
    CHECK(model.predict_label(Eigen::Vector4d::Constant(0.1)) == Preference::worse);
    if (model.probabilistic()) CHECK(model.predict_proba(Eigen::Vector4d::Constant(0.1)) == doctest::Approx(0.01));
  }
  train.labels.assign(3, Preference::better);
  Rng rng(1);
  CHECK(fit_classifier(config_for(ClassifierKind::gp), train, rng).predict_proba(Eigen::Vector4d::Zero()) ==
        doctest::Approx(0.99));
}

TEST_CASE("probabilities are clipped and labels threshold them") {
  Rng data(13);
  const auto train = clusters(data, 40);
  for (auto kind : {ClassifierKind::gp, ClassifierKind::ksvm}) {
    Rng rng(1);
    const auto model = fit_classifier(config_for(kind), train, rng);
    Rng probe(2);
    for (int i = 0; i < 1000; ++i) {
      const Eigen::Vector4d x(uniform01(probe), uniform01(probe), uniform01(probe), uniform01(probe));
      const double p = model.predict_proba(x);
      CHECK(p >= kMinProbability);
      CHECK(p <= 1.0 - kMinProbability);
      CHECK((model.predict_label(x) == Preference::better) == (p >= 0.5));
    }
  }
}

TEST_CASE("training is deterministic given the rng") {
  Rng data(14);
  const auto train = clusters(data, 30);
  for (auto kind : {ClassifierKind::gp, ClassifierKind::ksvm, ClassifierKind::mlp}) {
    Rng a(5), b(5);
    const auto ma = fit_classifier(config_for(kind), train, a);
    const auto mb = fit_classifier(config_for(kind), train, b);
    Rng probe(3);
    for (int i = 0; i < 50; ++i) {
      const Eigen::Vector4d x(uniform01(probe), uniform01(probe), uniform01(probe), uniform01(probe));
      CHECK(ma.predict_label(x) == mb.predict_label(x));
      if (ma.probabilistic()) CHECK(ma.predict_proba(x) == mb.predict_proba(x));
    }
  }
}

TEST_CASE("f1 hand values") {
  using P = Preference;
  const std::vector<P> truth{P::better, P::worse, P::better, P::worse};
  CHECK(f1_score(truth, truth) == 1.0);
  const std::vector<P> none(4, P::worse);
  CHECK(f1_score(none, none) == 0.0);
  CHECK(f1_score(ConfusionCounts{2, 1, 1, 0}) == doctest::Approx(2.0 / 3.0));
  const std::vector<P> pred{P::better, P::better, P::better, P::worse, P::worse};
  const std::vector<P> tru{P::better, P::better, P::worse, P::better, P::worse};
  const auto c = confusion(pred, tru);
  CHECK(c.tp == 2);
  CHECK(c.fp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 1);
  CHECK(c.total() == 5);
  std::vector<P> rp(pred.rbegin(), pred.rend()), rt(tru.rbegin(), tru.rend());
  CHECK(f1_score(rp, rt) == f1_score(pred, tru));
  CHECK_THROWS(f1_score(std::vector<P>{}, std::vector<P>{}));
  CHECK_THROWS(f1_score(pred, truth));
}
