#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "resonant/gesture.hpp"
#include "resonant/trajectory.hpp"

namespace resonant {

enum class AltitudeMode { Off, DecayScale, Octave };
enum class Axis { X = 0, Y = 1, Z = 2 };

struct EngineConfig {
  double sample_rate = 44100.0;
  std::size_t block_size = 256;
  int control_tick_ms = 5;

  std::string model_path;
  std::string map_path;
  std::string trajectory_path;  // live: looped pose source
  std::string input_path;       // live: looped audio source
  std::string record_path;      // live: optional output recording

  double lowest_freq_hz = 130.0;
  double min_bandwidth_hz = 5.0;
  double noise_mix = 0.1;
  double smoothing_ms = 10.0;
  bool normalize = true;
  bool pitch_follow = false;

  AltitudeConfig altitude;
  AltitudeMode altitude_mode = AltitudeMode::DecayScale;
  // Decays are multiplied by 1 + decay_scale_depth · altitude control.
  double decay_scale_depth = 1.0;
  double toggle_threshold = 0.9;
  double toggle_hysteresis = 0.05;

  Axis lat_axis = Axis::X;
  Axis lon_axis = Axis::Y;
  Axis alt_axis = Axis::Z;
  Interpolation interpolation = Interpolation::Linear;

  std::string bind_host = "0.0.0.0";
  std::uint16_t udp_port = 5505;
  std::uint16_t bridge_port = 5506;
  std::uint32_t seed = 0;
};

// Flat `key = value` text; `#` starts a comment. Unknown keys and bad
// values throw std::runtime_error naming the line.
EngineConfig parse_config(std::string_view text, EngineConfig base = {});
EngineConfig load_config(const std::string& path, EngineConfig base = {});

// Range checks independent of referenced files.
void check_config(const EngineConfig& config);

}  // namespace resonant
