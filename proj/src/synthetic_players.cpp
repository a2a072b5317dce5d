#include "altune/synthetic_players.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace altune {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double utility(const Eigen::Vector2d& c, const PreferenceOracleParams& p) {
  const Eigen::Vector2d sweet(p.sweet_drag, p.sweet_thrust);
  return -p.utility_scale * (c - sweet).squaredNorm();
}

}  // namespace

void HitOracleParams::validate() const {
  if (max_hits < 1) throw std::invalid_argument("max_hits must be at least 1");
  if (!(skill_noise_sd >= 0.0)) throw std::invalid_argument("skill_noise_sd must be non-negative");
}

void PreferenceOracleParams::validate() const {
  if (!(utility_scale > 0.0)) throw std::invalid_argument("utility_scale must be positive");
  if (!(choice_noise >= 0.0)) throw std::invalid_argument("choice_noise must be non-negative");
  if (!(sweet_drag >= 0.0 && sweet_drag <= 1.0 && sweet_thrust >= 0.0 && sweet_thrust <= 1.0))
    throw std::invalid_argument("sweet spot must lie in the unit square");
}

double mean_hits(const Eigen::Ref<const Eigen::VectorXd>& unit_point, const HitOracleParams& params) {
  if (unit_point.size() != 3) throw std::invalid_argument("hit oracle expects 3 parameters");
  double difficulty = 0.0;
  for (int i = 0; i < 3; ++i) difficulty += params.weights[static_cast<std::size_t>(i)] * unit_point[i];
  return params.max_hits * sigmoid(params.steepness * (difficulty - params.midpoint));
}

int hits(const Eigen::Ref<const Eigen::VectorXd>& unit_point, const HitOracleParams& params, Rng& rng) {
  const double noisy = mean_hits(unit_point, params) + params.skill_noise_sd * standard_normal(rng);
  return static_cast<int>(std::clamp(std::round(noisy), 0.0, static_cast<double>(params.max_hits)));
}

double preference_probability(const Eigen::Vector2d& current, const Eigen::Vector2d& previous,
                              const PreferenceOracleParams& params) {
  const double gain = utility(current, params) - utility(previous, params);
  if (params.choice_noise == 0.0) return gain > 0.0 ? 1.0 : (gain < 0.0 ? 0.0 : 0.5);
  return sigmoid(gain / params.choice_noise);
}

Preference prefer(const Eigen::Vector2d& current, const Eigen::Vector2d& previous,
                  const PreferenceOracleParams& params, Rng& rng) {
  return uniform01(rng) < preference_probability(current, previous, params) ? Preference::better
                                                                             : Preference::worse;
}

SamplePool<RegressionSample> generate_regression_pool(std::size_t n, const HitOracleParams& params,
                                                      const ParameterSpace& space,
                                                      std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("generate_regression_pool: n must be positive");
  if (space.dimension() != 3) throw std::invalid_argument("regression pool needs a 3-d space");
  params.validate();
  Rng rng(seed);
  std::vector<RegressionSample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector3d x(uniform01(rng), uniform01(rng), uniform01(rng));
    const int h = hits(x, params, rng);
    samples.push_back({space.denormalize(x), static_cast<double>(h)});
  }
  return SamplePool<RegressionSample>(std::move(samples));
}

SamplePool<PreferenceSample> generate_preference_pool(std::size_t n,
                                                      const PreferenceOracleParams& params,
                                                      const ParameterSpace& space,
                                                      std::uint64_t seed,
                                                      std::size_t waves_per_player) {
  if (n == 0) throw std::invalid_argument("generate_preference_pool: n must be positive");
  if (space.dimension() != 4) throw std::invalid_argument("preference pool needs a 4-d space");
  if (waves_per_player < 2) throw std::invalid_argument("players need at least two waves");
  params.validate();
  Rng rng(seed);
  std::vector<PreferenceSample> samples;
  samples.reserve(n);
  while (samples.size() < n) {
    // The first wave only sets the baseline controls; it has no comparison.
    Eigen::Vector2d previous(uniform01(rng), uniform01(rng));
    for (std::size_t wave = 1; wave < waves_per_player && samples.size() < n; ++wave) {
      const Eigen::Vector2d current(uniform01(rng), uniform01(rng));
      const Preference label = prefer(current, previous, params, rng);
      Eigen::Vector4d unit(current[0], current[1], previous[0], previous[1]);
      samples.push_back({space.denormalize(unit), label});
      previous = current;
    }
  }
  return SamplePool<PreferenceSample>(std::move(samples));
}

}  // namespace altune
