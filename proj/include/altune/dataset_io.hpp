#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "altune/design_space.hpp"

namespace altune {

// Playtest datasets in raw game units. Regression files have the header
// bullet_speed,bullet_size,fire_rate,hits and preference files
// drag,thrust,prev_drag,prev_thrust,label with label better or worse.
// Readers throw std::runtime_error naming the offending line.

void write_regression_csv(std::ostream& out, const std::vector<RegressionSample>& samples);
std::vector<RegressionSample> read_regression_csv(std::istream& in, const ParameterSpace& space);

void write_preference_csv(std::ostream& out, const std::vector<PreferenceSample>& samples);
std::vector<PreferenceSample> read_preference_csv(std::istream& in, const ParameterSpace& space);

void save_regression_csv(const std::filesystem::path& path, const std::vector<RegressionSample>& samples);
std::vector<RegressionSample> load_regression_csv(const std::filesystem::path& path,
                                                  const ParameterSpace& space);
void save_preference_csv(const std::filesystem::path& path, const std::vector<PreferenceSample>& samples);
std::vector<PreferenceSample> load_preference_csv(const std::filesystem::path& path,
                                                  const ParameterSpace& space);

}  // namespace altune
