#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "resonant/level.hpp"

namespace resonant {

struct SpectralPeak {
  double frequency = 0.0;  // Hz
  double energy = 0.0;     // squared linear magnitude, full-scale sine = 1
};

struct Partial {
  double frequency = 0.0;
  double energy = 0.0;
  int harmonic = 0;
};

struct PitchEstimate {
  std::optional<double> f0;
  double confidence = 0.0;
  std::vector<Partial> partials;
};

struct FeatureFrame {
  double time = 0.0;  // seconds, end of the analysis window
  std::optional<double> f0;
  double amplitude = 0.0;  // linear RMS
  std::optional<double> centroid;
  double confidence = 0.0;
};

struct TrackerConfig {
  std::size_t window = 4096;
  std::size_t hop = 512;
  double threshold_db = -60.0;  // relative to the frame maximum
  double f_min = 60.0;
  double f_max = 2000.0;
  double tolerance = 0.03;      // relative harmonic-matching tolerance
  double energy_floor = 1e-10;
  // Strongest peaks kept per frame for pitch estimation; 0 keeps all.
  std::size_t max_peaks = 64;
  double lowest_freq_hz = kDefaultLowestFreqHz;
};

// Hann-windowed magnitude spectrum and peak picker. Frame length must equal
// the configured window (a power of two).
class SpectrumAnalyzer {
 public:
  SpectrumAnalyzer(std::size_t window, double sample_rate, double threshold_db = -60.0);
  ~SpectrumAnalyzer();
  SpectrumAnalyzer(SpectrumAnalyzer&&) noexcept;
  SpectrumAnalyzer& operator=(SpectrumAnalyzer&&) noexcept;

  std::size_t window() const;

  // Peaks sorted by frequency. Frequencies are refined by parabolic
  // interpolation of the log magnitude around each local maximum.
  std::vector<SpectralPeak> analyze(std::span<const double> frame);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Harmonic-sieve pitch estimate: the candidate (a peak or one of its
// integer subdivisions inside [f_min, f_max]) whose harmonics collect the
// most peak energy. Absent when fewer than two peaks match.
PitchEstimate estimate_f0(std::span<const SpectralPeak> peaks, const TrackerConfig& config = {});

// Energy-weighted mean frequency of the matched partials.
std::optional<double> spectral_centroid(std::span<const Partial> partials);

class FeatureTracker {
 public:
  FeatureTracker(double sample_rate, TrackerConfig config = {});

  const TrackerConfig& config() const { return config_; }
  // Samples between a signal change and the first frame fully covering it.
  std::size_t latency_samples() const { return config_.window; }

  // Consumes a block and returns the frames completed inside it.
  std::vector<FeatureFrame> push(std::span<const double> block);
  void reset();

 private:
  FeatureFrame analyze_current();

  double sample_rate_;
  TrackerConfig config_;
  SpectrumAnalyzer analyzer_;
  AmplitudeFollower follower_;
  std::vector<double> ring_;
  std::vector<double> frame_;
  std::size_t head_ = 0;
  std::size_t consumed_ = 0;
  std::size_t since_frame_ = 0;
};

}  // namespace resonant
