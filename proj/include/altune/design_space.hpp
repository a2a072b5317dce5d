#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace altune {

/// A tunable game parameter with its bounds in raw game units.
struct ParameterSpec {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
};

/// Raw-unit parameter values, ordered as the owning ParameterSpace.
struct DesignPoint {
  std::vector<double> values;

  bool operator==(const DesignPoint&) const = default;
};

/// Ordered set of ParameterSpecs. Every model in the library works on the
/// unit cube; this class owns the affine map to and from raw units.
class ParameterSpace {
 public:
  ParameterSpace() = default;
  /// Throws std::invalid_argument unless every lower < upper and names are unique.
  explicit ParameterSpace(std::vector<ParameterSpec> specs);

  std::size_t dimension() const { return specs_.size(); }
  const std::vector<ParameterSpec>& specs() const { return specs_; }
  const ParameterSpec& operator[](std::size_t i) const { return specs_[i]; }

  /// Throws std::invalid_argument on dimension mismatch or an out-of-bounds value.
  void validate(const DesignPoint& point) const;
  bool contains(const DesignPoint& point) const;

  /// (v - lower) / (upper - lower) per coordinate. Out-of-bound points are
  /// rejected, never clamped.
  Eigen::VectorXd normalize(const DesignPoint& point) const;
  DesignPoint denormalize(const Eigen::Ref<const Eigen::VectorXd>& unit) const;

 private:
  std::vector<ParameterSpec> specs_;
};

/// Enemy parameters tuned for the hit-count goal.
ParameterSpace default_enemy_space();
/// Current and previous ship drag/thrust for the preference goal.
ParameterSpace default_control_space();

enum class Preference : unsigned char { worse = 0, better = 1 };

const char* to_string(Preference p);
/// Accepts "better" / "worse"; throws std::invalid_argument otherwise.
Preference parse_preference(const std::string& text);

struct RegressionSample {
  DesignPoint point;
  double hits = 0.0;  // times the player was hit in one wave; real-valued, >= 0
};

struct PreferenceSample {
  DesignPoint point;  // drag, thrust, prev_drag, prev_thrust
  Preference label = Preference::worse;
};

/// Squared deviation of the observed hit count from the designer's target.
struct RegressionObjective {
  double target_hits = 6.0;
};

double objective_loss(double hits, const RegressionObjective& objective);

/// Finite pool of candidate playtests. Each index can be consumed once;
/// consuming reveals the sample (including its output).
template <typename Sample>
class SamplePool {
 public:
  SamplePool() = default;
  explicit SamplePool(std::vector<Sample> samples)
      : samples_(std::move(samples)), used_(samples_.size(), false) {}

  std::size_t size() const { return samples_.size(); }
  std::size_t remaining() const { return remaining_count_(); }
  bool exhausted() const { return remaining() == 0; }
  bool is_used(std::size_t index) const { return used_.at(index); }

  /// Read-only access for export and inspection; does not consume.
  const Sample& peek(std::size_t index) const { return samples_.at(index); }
  const std::vector<Sample>& samples() const { return samples_; }

  std::vector<std::size_t> unused_indices() const {
    std::vector<std::size_t> out;
    out.reserve(remaining());
    for (std::size_t i = 0; i < used_.size(); ++i)
      if (!used_[i]) out.push_back(i);
    return out;
  }

  /// Throws std::out_of_range for a bad index and std::logic_error when the
  /// index was already consumed.
  const Sample& take(std::size_t index) {
    if (index >= samples_.size())
      throw std::out_of_range("SamplePool::take: index " + std::to_string(index) +
                              " out of range (size " + std::to_string(samples_.size()) + ")");
    if (used_[index])
      throw std::logic_error("SamplePool::take: index " + std::to_string(index) +
                             " already consumed");
    used_[index] = true;
    ++taken_;
    return samples_[index];
  }

 private:
  std::size_t remaining_count_() const { return samples_.size() - taken_; }

  std::vector<Sample> samples_;
  std::vector<bool> used_;
  std::size_t taken_ = 0;
};

}  // namespace altune
