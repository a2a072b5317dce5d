#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

#include "altune/design_space.hpp"
#include "altune/rng.hpp"

namespace altune {

/// Simulated hit response to enemy parameters (normalized speed, size, rate).
struct HitOracleParams {
  int max_hits = 20;
  std::array<double, 3> weights{1.2, 0.8, 1.5};
  double skill_noise_sd = 1.0;
  double steepness = 6.0;
  double midpoint = 1.75;

  void validate() const;
};

/// Simulated pairwise judgement of ship controls (normalized drag, thrust).
struct PreferenceOracleParams {
  double sweet_drag = 0.4;
  double sweet_thrust = 0.6;
  double utility_scale = 8.0;
  double choice_noise = 1.0;

  void validate() const;
};

/// Noise-free expected hits: max_hits * sigmoid(steepness * (w . x - midpoint)).
double mean_hits(const Eigen::Ref<const Eigen::VectorXd>& unit_point, const HitOracleParams& params);

/// round(mean + Normal(0, skill_noise_sd)) clamped to [0, max_hits].
int hits(const Eigen::Ref<const Eigen::VectorXd>& unit_point, const HitOracleParams& params, Rng& rng);

/// Closed-form P("better") for moving from `previous` to `current` controls.
double preference_probability(const Eigen::Vector2d& current, const Eigen::Vector2d& previous,
                              const PreferenceOracleParams& params);

Preference prefer(const Eigen::Vector2d& current, const Eigen::Vector2d& previous,
                  const PreferenceOracleParams& params, Rng& rng);

/// n uniform enemy settings with oracle hit counts, in raw units of `space`.
SamplePool<RegressionSample> generate_regression_pool(std::size_t n, const HitOracleParams& params,
                                                      const ParameterSpace& space,
                                                      std::uint64_t seed);

/// Comparisons drawn from simulated players who each play a run of waves
/// with fresh random controls; the previous controls of a sample are those
/// of the player's preceding wave.
SamplePool<PreferenceSample> generate_preference_pool(std::size_t n,
                                                      const PreferenceOracleParams& params,
                                                      const ParameterSpace& space,
                                                      std::uint64_t seed,
                                                      std::size_t waves_per_player = 10);

}  // namespace altune
