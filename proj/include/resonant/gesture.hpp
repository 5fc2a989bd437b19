#pragma once

#include <array>
#include <limits>

namespace resonant {

using Vec3 = std::array<double, 3>;

struct SensorPose {
  Vec3 position{};           // x, y, z
  Vec3 orientation{};        // yaw, pitch, roll in degrees
};

struct PoseFrame {
  double time = 0.0;
  SensorPose violin;
  SensorPose bow;
};

struct AltitudeConfig {
  double normal_altitude = 1.0;
  double floor_altitude = 0.0;
  double reset_margin = 0.02;
};

// Lowest altitude since the last reset. Dipping the instrument latches a
// deeper control value; lifting it above normal_altitude + reset_margin
// starts over from the current altitude.
class AltitudeState {
 public:
  explicit AltitudeState(AltitudeConfig config = {});

  const AltitudeConfig& config() const { return config_; }
  double running_min() const { return running_min_; }
  double control() const;

  // Returns the control value in [0, 1].
  double update(double z);
  void reset() { running_min_ = std::numeric_limits<double>::infinity(); }

 private:
  AltitudeConfig config_;
  double running_min_ = std::numeric_limits<double>::infinity();
};

// Altitude switch with a hysteresis band of width `hysteresis` centred on
// `threshold`: below the band turns on, above it turns off.
class OctaveToggle {
 public:
  OctaveToggle(double threshold, double hysteresis = 0.05);

  bool on() const { return on_; }
  bool update(double z);

 private:
  double threshold_;
  double hysteresis_;
  bool on_ = false;
};

// violin - bow, componentwise.
Vec3 bow_relative(const Vec3& violin, const Vec3& bow);

// Displacement of the relative position per second. Throws
// std::invalid_argument when dt <= 0.
double bow_speed(const Vec3& previous, const Vec3& current, double dt);

}  // namespace resonant
