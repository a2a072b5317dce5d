#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "altune/synthetic_players.hpp"

using namespace altune;

TEST_CASE("hit oracle hand values") {
  HitOracleParams p;
  p.skill_noise_sd = 0.0;
  Rng rng(1);
  CHECK(hits(Eigen::Vector3d::Zero(), p, rng) == 0);
  CHECK(mean_hits(Eigen::Vector3d::Zero(), p) == doctest::Approx(20.0 / (1.0 + std::exp(10.5))));
  // w . x = 1.75 at x = (0.5, 0.5, 0.5) * 1.75 / 1.75
  const Eigen::Vector3d mid = Eigen::Vector3d::Constant(1.75 / 3.5);
  CHECK(mean_hits(mid, p) == doctest::Approx(10.0));
  CHECK(hits(mid, p, rng) == 10);
}

TEST_CASE("hits stay within [0, max_hits]") {
  const HitOracleParams p;
  Rng rng(2);
  for (int i = 0; i < 100000; ++i) {
    const Eigen::Vector3d x(uniform01(rng), uniform01(rng), uniform01(rng));
    const int h = hits(x, p, rng);
    REQUIRE(h >= 0);
    REQUIRE(h <= p.max_hits);
  }
}

TEST_CASE("noise-free hits are monotone in every coordinate") {
  HitOracleParams p;
  p.skill_noise_sd = 0.0;
  Rng rng(1);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      for (int c = 0; c < 5; ++c) {
        const Eigen::Vector3d x(a / 4.0, b / 4.0, c / 4.0);
        const int h = hits(x, p, rng);
        for (int d = 0; d < 3; ++d) {
          if (x[d] >= 1.0) continue;
          Eigen::Vector3d up = x;
          up[d] += 0.25;
          CHECK(hits(up, p, rng) >= h);
        }
      }
}

TEST_CASE("preference probability symmetry and limits") {
  const PreferenceOracleParams p;
  const Eigen::Vector2d a(0.1, 0.9), b(0.7, 0.3);
  CHECK(preference_probability(a, a, p) == 0.5);
  CHECK(preference_probability(a, b, p) == doctest::Approx(1.0 - preference_probability(b, a, p)).epsilon(1e-14));
  PreferenceOracleParams sharp = p;
  sharp.choice_noise = 1e-6;
  CHECK(preference_probability({0.4, 0.6}, {1.0, 0.0}, sharp) > 1.0 - 1e-12);
  sharp.choice_noise = 0.0;
  CHECK(preference_probability({0.4, 0.6}, {1.0, 0.0}, sharp) == 1.0);
}

TEST_CASE("preference label frequencies match the closed form") {
  const PreferenceOracleParams p;
  Rng rng(3);
  const std::pair<Eigen::Vector2d, Eigen::Vector2d> probes[] = {
      {{0.4, 0.6}, {0.0, 0.0}}, {{0.1, 0.1}, {0.5, 0.5}}, {{0.3, 0.6}, {0.5, 0.6}},
      {{0.9, 0.9}, {0.2, 0.8}}, {{0.5, 0.5}, {0.5, 0.5}}};
  for (const auto& [cur, prev] : probes) {
    const int n = 50000;
    int better = 0;
    for (int i = 0; i < n; ++i)
      if (prefer(cur, prev, p, rng) == Preference::better) ++better;
    CHECK(std::abs(better / static_cast<double>(n) - preference_probability(cur, prev, p)) < 0.01);
  }
}

TEST_CASE("regression pool generation") {
  const auto pool = generate_regression_pool(991, {}, default_enemy_space(), 7);
  CHECK(pool.size() == 991);
  double lo = 1e9, hi = -1e9;
  for (const auto& s : pool.samples()) {
    CHECK(default_enemy_space().contains(s.point));
    lo = std::min(lo, s.hits);
    hi = std::max(hi, s.hits);
  }
  CHECK(hi - lo >= 16.0);
  const auto again = generate_regression_pool(991, {}, default_enemy_space(), 7);
  for (std::size_t i = 0; i < 991; ++i) {
    CHECK(again.peek(i).point == pool.peek(i).point);
    CHECK(again.peek(i).hits == pool.peek(i).hits);
  }
  CHECK_THROWS_AS(generate_regression_pool(0, {}, default_enemy_space(), 7), std::invalid_argument);
}

TEST_CASE("preference pool generation") {
  const auto space = default_control_space();
  const auto pool = generate_preference_pool(416, {}, space, 11);
  CHECK(pool.size() == 416);
  std::size_t better = 0;
  for (const auto& s : pool.samples()) {
    CHECK(space.contains(s.point));
    if (s.label == Preference::better) ++better;
  }
  const double rate = static_cast<double>(better) / 416.0;
  CHECK(rate >= 0.3);
  CHECK(rate <= 0.7);
  // Consecutive waves of one player chain their controls.
  CHECK(pool.peek(1).point.values[2] == pool.peek(0).point.values[0]);
  CHECK(pool.peek(1).point.values[3] == pool.peek(0).point.values[1]);
  const auto again = generate_preference_pool(416, {}, space, 11);
  for (std::size_t i = 0; i < 416; ++i) {
    CHECK(again.peek(i).point == pool.peek(i).point);
    CHECK(again.peek(i).label == pool.peek(i).label);
  }
}

TEST_CASE("oracle parameter validation") {
  HitOracleParams h;
  h.max_hits = 0;
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
  PreferenceOracleParams p;
  p.utility_scale = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
