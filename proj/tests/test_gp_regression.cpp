#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "altune/errors.hpp"
#include "altune/gp_regression.hpp"
#include "oracles.hpp"

using namespace altune;

namespace {

struct Problem {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  KernelParams k;
};

Problem random_problem(Rng& rng, Eigen::Index n, Eigen::Index d) {
  Problem p;
  p.x.resize(n, d);
  p.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) p.x(i, j) = uniform01(rng);
    p.y[i] = 20.0 * uniform01(rng);
  }
  p.k.signal_variance = 0.5 + 2.0 * uniform01(rng);
  p.k.length_scales = Eigen::VectorXd::NullaryExpr(d, [&] { return 0.1 + uniform01(rng); });
  p.k.noise_variance = 0.01 + 0.2 * uniform01(rng);
  return p;
}

Eigen::VectorXd random_point(Rng& rng, Eigen::Index d) {
  return Eigen::VectorXd::NullaryExpr(d, [&] { return uniform01(rng); });
}

}  // namespace

TEST_CASE("kernel hand values") {
  KernelParams k{1.0, Eigen::VectorXd::Constant(1, 0.5), 0.1};
  CHECK(kernel_eval(Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 0.5), k) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  const Eigen::Vector3d a(0.1, 0.2, 0.3);
  KernelParams k3{2.5, Eigen::Vector3d(0.3, 0.3, 0.3), 0.1};
  CHECK(kernel_eval(a, a, k3) == 2.5);
  k3.length_scales.setConstant(1e-3);
  CHECK(kernel_eval(a, Eigen::Vector3d(0.9, 0.9, 0.9), k3) < 1e-300);
  CHECK_THROWS_AS(kernel_eval(a, Eigen::Vector2d(0, 0), k3), std::invalid_argument);
}

TEST_CASE("kernel is symmetric and bounded by the signal variance") {
  Rng rng(2);
  KernelParams k{1.7, Eigen::Vector3d(0.2, 0.5, 0.9), 0.1};
  for (int i = 0; i < 100; ++i) {
    const auto a = random_point(rng, 3);
    const auto b = random_point(rng, 3);
    CHECK(kernel_eval(a, b, k) == kernel_eval(b, a, k));
    CHECK(kernel_eval(a, b, k) <= 1.7);
  }
}

TEST_CASE("predictions match the dense-solve oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_problem(rng, 3 + static_cast<Eigen::Index>(uniform_index(rng, 18)), 3);
    const auto model = GPModel::fit(p.x, p.y, p.k);
    for (int q = 0; q < 5; ++q) {
      const auto x = random_point(rng, 3);
      const auto got = model.predict(x);
      const auto want = oracle::gp_predict(p.x, p.y, p.k.signal_variance, p.k.length_scales, p.k.noise_variance, x);
      CHECK(std::abs(got.mean - want.mean) < 1e-8);
      CHECK(std::abs(got.variance - want.variance) < 1e-8);
    }
  }
}

TEST_CASE("batch prediction agrees with pointwise prediction") {
  Rng rng(4);
  const auto p = random_problem(rng, 12, 3);
  const auto model = GPModel::fit(p.x, p.y, p.k);
  Eigen::MatrixXd q(8, 3);
  for (int i = 0; i < 8; ++i) q.row(i) = random_point(rng, 3).transpose();
  const auto batch = model.predict_batch(q);
  for (int i = 0; i < 8; ++i) {
    const auto single = model.predict(q.row(i).transpose());
    CHECK(batch.mean[i] == doctest::Approx(single.mean).epsilon(1e-12));
    CHECK(batch.variance[i] == doctest::Approx(single.variance).epsilon(1e-10));
  }
}

TEST_CASE("single noise-free sample is interpolated") {
  Eigen::MatrixXd x(1, 2);
  x << 0.3, 0.7;
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(1, 4.0);
  const auto model = GPModel::fit(x, y, {1.0, Eigen::Vector2d(0.3, 0.3), 1e-12});
  const auto pred = model.predict(Eigen::Vector2d(0.3, 0.7));
  CHECK(pred.mean == doctest::Approx(4.0));
  CHECK(pred.variance <= 1e-8);
}

TEST_CASE("training targets are recovered at low noise") {
  Rng rng(9);
  auto p = random_problem(rng, 8, 3);
  p.k.noise_variance = 1e-12;
  p.k.length_scales.setConstant(0.2);
  const auto model = GPModel::fit(p.x, p.y, p.k);
  for (Eigen::Index i = 0; i < 8; ++i) CHECK(std::abs(model.predict(p.x.row(i).transpose()).mean - p.y[i]) < 1e-6);
}

TEST_CASE("far from data the prior is recovered") {
  Eigen::MatrixXd x(3, 1);
  x << 0.0, 0.05, 0.1;
  const Eigen::Vector3d y(1.0, 2.0, 6.0);
  const auto model = GPModel::fit(x, y, {1.0, Eigen::VectorXd::Constant(1, 0.01), 0.1});
  const auto pred = model.predict(Eigen::VectorXd::Constant(1, 1.0));
  CHECK(pred.mean == doctest::Approx(3.0));
  CHECK(pred.variance == doctest::Approx(model.target_scale() * model.target_scale()));
}

TEST_CASE("variance never exceeds signal plus noise and never rises with more data") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_problem(rng, 10, 3);
    const auto small = GPModel::fit(p.x.topRows(9), p.y.head(9), p.k);
    // Same standardization in both models so variances are comparable.
    Eigen::VectorXd y = p.y;
    y[9] = p.y.head(9).mean();
    const auto big = GPModel::fit(p.x, y, p.k);
    const double s2 = small.target_scale() * small.target_scale();
    for (int q = 0; q < 20; ++q) {
      const auto x = random_point(rng, 3);
      const auto v_small = small.predict(x).variance / s2;
      const auto v_big = big.predict(x).variance / (big.target_scale() * big.target_scale());
      CHECK(v_small >= 0.0);
      CHECK(v_small <= p.k.signal_variance + p.k.noise_variance);
      CHECK(v_big <= v_small + 1e-9);
    }
  }
}

TEST_CASE("log marginal likelihood hand value and permutation invariance") {
  Eigen::MatrixXd x(1, 1);
  x << 0.5;
  const auto one = GPModel::fit(x, Eigen::VectorXd::Constant(1, 3.0), {0.9, Eigen::VectorXd::Constant(1, 0.3), 0.1});
  CHECK(one.log_marginal_likelihood() == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-12));

  Rng rng(8);
  const auto p = random_problem(rng, 15, 3);
  std::vector<Eigen::Index> perm(15);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  Eigen::MatrixXd xp(15, 3);
  Eigen::VectorXd yp(15);
  for (Eigen::Index i = 0; i < 15; ++i) {
    xp.row(i) = p.x.row(perm[static_cast<std::size_t>(i)]);
    yp[i] = p.y[perm[static_cast<std::size_t>(i)]];
  }
  const auto a = GPModel::fit(p.x, p.y, p.k);
  const auto b = GPModel::fit(xp, yp, p.k);
  CHECK(a.log_marginal_likelihood() == doctest::Approx(b.log_marginal_likelihood()).epsilon(1e-10));
  const auto q = random_point(rng, 3);
  CHECK(std::abs(a.predict(q).mean - b.predict(q).mean) <= 1e-10);
}

TEST_CASE("refitting reproduces identical predictions") {
  Rng rng(12);
  const auto p = random_problem(rng, 10, 3);
  const auto a = GPModel::fit(p.x, p.y, p.k);
  const auto b = GPModel::fit(p.x, p.y, p.k);
  const auto q = random_point(rng, 3);
  CHECK(a.predict(q).mean == b.predict(q).mean);
  CHECK(a.predict(q).variance == b.predict(q).variance);
}

TEST_CASE("fit rejects bad input") {
  Eigen::MatrixXd x(2, 3);
  x.setZero();
  CHECK_THROWS_AS(GPModel::fit(x, Eigen::VectorXd::Zero(3), KernelParams::defaults(3)), std::invalid_argument);
  CHECK_THROWS_AS(GPModel::fit(Eigen::MatrixXd(0, 3), Eigen::VectorXd(0), KernelParams::defaults(3)),
                  std::invalid_argument);
  KernelParams bad = KernelParams::defaults(3);
  bad.noise_variance = -1.0;
  CHECK_THROWS_AS(GPModel::fit(x, Eigen::VectorXd::Zero(2), bad), std::invalid_argument);
}

TEST_CASE("hyperparameter search") {
  Rng data_rng(31);
  const Eigen::Index n = 100;
  Eigen::MatrixXd x(n, 3);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = uniform01(data_rng);
  // Sample from a GP with known length scales.
  const KernelParams truth{1.0, Eigen::Vector3d(0.2, 0.5, 1.0), 0.01};
  Eigen::MatrixXd k = kernel_matrix(x, x, truth);
  k.diagonal().array() += truth.noise_variance;
  const Eigen::MatrixXd l = k.llt().matrixL();
  const Eigen::VectorXd z = Eigen::VectorXd::NullaryExpr(n, [&] { return standard_normal(data_rng); });
  const Eigen::VectorXd y = l * z;

  SUBCASE("recovers length scales within an order of magnitude") {
    Rng rng(1);
    const auto result = optimize_hyperparams(x, y, KernelParams::defaults(3), {3, 100}, rng);
    CHECK_FALSE(result.used_fallback);
    for (Eigen::Index d = 0; d < 3; ++d) {
      CHECK(result.params.length_scales[d] > truth.length_scales[d] / 10.0);
      CHECK(result.params.length_scales[d] < truth.length_scales[d] * 10.0);
    }
    const auto initial = GPModel::fit(x, y, KernelParams::defaults(3)).log_marginal_likelihood();
    CHECK(result.log_likelihood >= initial);
  }
  SUBCASE("zero restarts returns the initial params") {
    Rng rng(1);
    const auto init = KernelParams::defaults(3);
    const auto result = optimize_hyperparams(x, y, init, {0, 100}, rng);
    CHECK(result.params.length_scales == init.length_scales);
    CHECK(result.params.signal_variance == init.signal_variance);
    CHECK(result.params.noise_variance == init.noise_variance);
  }
  SUBCASE("same seed gives the same result") {
    Rng a(4), b(4);
    const auto ra = optimize_hyperparams(x, y, KernelParams::defaults(3), {2, 40}, a);
    const auto rb = optimize_hyperparams(x, y, KernelParams::defaults(3), {2, 40}, b);
    CHECK(ra.params.length_scales == rb.params.length_scales);
    CHECK(ra.log_likelihood == rb.log_likelihood);
  }
  SUBCASE("needs three samples") {
    Rng rng(1);
    CHECK_THROWS_AS(optimize_hyperparams(x.topRows(2), y.head(2), KernelParams::defaults(3), {}, rng),
                    std::invalid_argument);
  }
}
