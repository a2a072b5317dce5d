#include <doctest.h>

#include <cmath>
#include <vector>

#include "altune/rng.hpp"
#include "oracles.hpp"

using namespace altune;

TEST_CASE("derived seeds are stable and path dependent") {
  CHECK(derive_seed(7, {1, 2}) == derive_seed(7, {1, 2}));
  CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
  CHECK(derive_seed(7, {1}) != derive_seed(8, {1}));
  CHECK(hash_label("ucb") != hash_label("ei"));
  CHECK(hash_label("") == 0xcbf29ce484222325ULL);
}

TEST_CASE("uniform_index is uniform") {
  Rng rng(11);
  std::vector<std::size_t> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[uniform_index(rng, 7)];
  CHECK(oracle::chi_square_uniform(counts) < oracle::chi_square_critical(6));
}

TEST_CASE("standard_normal has unit moments") {
  Rng rng(5);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("uniform01 stays in [0, 1)") {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform01(rng);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}
