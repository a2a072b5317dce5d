#include "altune/design_space.hpp"

#include <set>

namespace altune {

ParameterSpace::ParameterSpace(std::vector<ParameterSpec> specs) : specs_(std::move(specs)) {
  std::set<std::string> names;
  for (const auto& s : specs_) {
    if (!(s.lower < s.upper))
      throw std::invalid_argument("parameter '" + s.name + "': lower bound must be below upper");
    if (!names.insert(s.name).second)
      throw std::invalid_argument("parameter '" + s.name + "' declared twice");
  }
}

void ParameterSpace::validate(const DesignPoint& point) const {
  if (point.values.size() != specs_.size())
    throw std::invalid_argument("design point has " + std::to_string(point.values.size()) +
                                " values, space has " + std::to_string(specs_.size()));
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const double v = point.values[i];
    if (!(v >= specs_[i].lower && v <= specs_[i].upper))
      throw std::invalid_argument("parameter '" + specs_[i].name + "' value " +
                                  std::to_string(v) + " outside [" +
                                  std::to_string(specs_[i].lower) + ", " +
                                  std::to_string(specs_[i].upper) + "]");
  }
}

bool ParameterSpace::contains(const DesignPoint& point) const {
  if (point.values.size() != specs_.size()) return false;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const double v = point.values[i];
    if (!(v >= specs_[i].lower && v <= specs_[i].upper)) return false;
  }
  return true;
}

Eigen::VectorXd ParameterSpace::normalize(const DesignPoint& point) const {
  validate(point);
  Eigen::VectorXd unit(static_cast<Eigen::Index>(specs_.size()));
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const auto& s = specs_[i];
    unit[static_cast<Eigen::Index>(i)] = (point.values[i] - s.lower) / (s.upper - s.lower);
  }
  return unit;
}

DesignPoint ParameterSpace::denormalize(const Eigen::Ref<const Eigen::VectorXd>& unit) const {
  if (static_cast<std::size_t>(unit.size()) != specs_.size())
    throw std::invalid_argument("unit vector has " + std::to_string(unit.size()) +
                                " coordinates, space has " + std::to_string(specs_.size()));
  DesignPoint point;
  point.values.resize(specs_.size());
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const double u = unit[static_cast<Eigen::Index>(i)];
    if (!(u >= 0.0 && u <= 1.0))
      throw std::invalid_argument("unit coordinate " + std::to_string(i) + " outside [0, 1]");
    const auto& s = specs_[i];
    // Endpoints map exactly so that round trips stay in bounds.
    point.values[i] = u == 1.0 ? s.upper : s.lower + u * (s.upper - s.lower);
  }
  return point;
}

// Raw ranges are synthetic defaults (px/s, px, shots/s; drag 1/s, thrust px/s^2).
// They carry no modelling weight once inputs are normalized.
ParameterSpace default_enemy_space() {
  return ParameterSpace({{"bullet_speed", 100.0, 400.0},
                         {"bullet_size", 2.0, 12.0},
                         {"fire_rate", 0.5, 3.0}});
}

ParameterSpace default_control_space() {
  return ParameterSpace({{"drag", 0.1, 5.0},
                         {"thrust", 50.0, 500.0},
                         {"prev_drag", 0.1, 5.0},
                         {"prev_thrust", 50.0, 500.0}});
}

const char* to_string(Preference p) { return p == Preference::better ? "better" : "worse"; }

Preference parse_preference(const std::string& text) {
  if (text == "better") return Preference::better;
  if (text == "worse") return Preference::worse;
  throw std::invalid_argument("preference label must be 'better' or 'worse', got '" + text + "'");
}

double objective_loss(double hits, const RegressionObjective& objective) {
  const double d = hits - objective.target_hits;
  return d * d;
}

}  // namespace altune
