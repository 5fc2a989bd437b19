#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "resonant/resonance.hpp"

namespace resonant {

// Lowest open string of a five-string violin (low C).
inline constexpr double kDefaultLowestFreqHz = 130.0;

// RMS over a trailing window at least one period of the lowest expected
// frequency long. One level is reported per follow() call.
class AmplitudeFollower {
 public:
  explicit AmplitudeFollower(double sample_rate, double lowest_freq_hz = kDefaultLowestFreqHz);

  std::size_t window_len() const { return history_.size(); }
  double sample_rate() const { return sample_rate_; }
  double level() const;

  // Reports delivered per second when fed blocks of block_size samples.
  double reports_per_second(std::size_t block_size) const {
    return sample_rate_ / static_cast<double>(block_size);
  }

  double follow(std::span<const double> block);
  void push(double sample);
  void reset();

 private:
  double sample_rate_;
  std::vector<double> history_;
  std::size_t head_ = 0;
  double sum_ = 0.0;
  std::size_t nonzero_ = 0;
};

// First-order smoothed output gain that makes the output level track the
// input level.
class Normalizer {
 public:
  explicit Normalizer(double time_constant_s = 0.010, double epsilon = 1e-6, double initial_gain = 1.0);

  double gain() const { return gain_; }
  double time_constant() const { return time_constant_; }
  double epsilon() const { return epsilon_; }
  void set_time_constant(double seconds);

  double target_gain(double input_level, double output_level) const;
  // Moves the gain toward the target over dt seconds and returns it.
  double normalize(double input_level, double output_level, double dt);

 private:
  double time_constant_;
  double epsilon_;
  double gain_;
};

// Uniform white noise in (-1, 1). Uses mt19937 with an explicit mapping so
// the sequence for a seed is identical across standard libraries.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint32_t seed = 0) : engine_(seed) {}

  double next() {
    return (static_cast<double>(engine_()) + 0.5) * (2.0 / 4294967296.0) - 1.0;
  }

 private:
  std::mt19937 engine_;
};

// block[i] += mix · input_level · u[i].
void inject_noise(std::span<double> block, double input_level, double mix, NoiseSource& noise);

struct BandwidthClamp {
  ResonanceModel model;
  std::size_t clamped = 0;
};

// Shortens the decay of every resonance narrower than min_bandwidth_hz so
// its bandwidth becomes exactly min_bandwidth_hz.
BandwidthClamp clamp_bandwidths(const ResonanceModel& model, double min_bandwidth_hz);

// Same rule applied in place to a flat [gain, freq, decay] vector.
std::size_t clamp_bandwidths(std::span<double> params, double min_bandwidth_hz);

}  // namespace resonant
