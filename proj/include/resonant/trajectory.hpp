#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "resonant/gesture.hpp"

namespace resonant {

enum class Interpolation { Linear, StepHold };

// Timestamped pose samples standing in for a live tracker. Times strictly
// increase; sampling before the first or after the last frame holds the
// end value.
class Trajectory {
 public:
  explicit Trajectory(std::vector<PoseFrame> frames);

  const std::vector<PoseFrame>& frames() const { return frames_; }
  double duration() const { return frames_.back().time; }

  PoseFrame sample(double t, Interpolation mode = Interpolation::Linear) const;
  // Wraps t into [0, duration] so the trajectory repeats.
  PoseFrame sample_looped(double t, Interpolation mode = Interpolation::Linear) const;

 private:
  std::vector<PoseFrame> frames_;
};

// CSV columns: time_s, vx, vy, vz, vyaw, vpitch, vroll, bx, by, bz, byaw,
// bpitch, broll. A non-numeric first line is taken as the header.
Trajectory parse_trajectory(std::string_view text);
Trajectory load_trajectory(const std::string& path);

}  // namespace resonant
