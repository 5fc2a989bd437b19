#include "resonant/gesture.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace resonant {

AltitudeState::AltitudeState(AltitudeConfig config) : config_(config) {
  if (!(config.floor_altitude < config.normal_altitude)) {
    throw std::invalid_argument("floor altitude must lie below normal altitude");
  }
  if (!(config.reset_margin >= 0.0)) throw std::invalid_argument("reset margin must be non-negative");
}

double AltitudeState::control() const {
  if (!std::isfinite(running_min_)) return 0.0;
  const double span = config_.normal_altitude - config_.floor_altitude;
  return std::clamp((config_.normal_altitude - running_min_) / span, 0.0, 1.0);
}

double AltitudeState::update(double z) {
  if (z > config_.normal_altitude + config_.reset_margin) {
    running_min_ = z;
  } else {
    running_min_ = std::min(running_min_, z);
  }
  return control();
}

OctaveToggle::OctaveToggle(double threshold, double hysteresis) : threshold_(threshold), hysteresis_(hysteresis) {
  if (!(hysteresis > 0.0)) throw std::invalid_argument("hysteresis must be positive");
}

bool OctaveToggle::update(double z) {
  if (z < threshold_ - 0.5 * hysteresis_) {
    on_ = true;
  } else if (z > threshold_ + 0.5 * hysteresis_) {
    on_ = false;
  }
  return on_;
}

Vec3 bow_relative(const Vec3& violin, const Vec3& bow) {
  return {violin[0] - bow[0], violin[1] - bow[1], violin[2] - bow[2]};
}

double bow_speed(const Vec3& previous, const Vec3& current, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double dx = current[0] - previous[0];
  const double dy = current[1] - previous[1];
  const double dz = current[2] - previous[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz) / dt;
}

}  // namespace resonant
