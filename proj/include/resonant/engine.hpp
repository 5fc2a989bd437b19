#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "resonant/config.hpp"
#include "resonant/gesture.hpp"
#include "resonant/level.hpp"
#include "resonant/resonance.hpp"
#include "resonant/simplicial.hpp"
#include "resonant/tracker.hpp"

namespace resonant {

// Raised when a map's codomain does not have 3 values per resonance.
class DimensionError : public std::runtime_error {
 public:
  DimensionError(std::size_t expected, std::size_t actual);
  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

void check_dimensions(const ResonanceModel& model, const SimplicialMap& map);

struct MappedParameters {
  Point2 position;
  double altitude = 0.0;
  double altitude_control = 0.0;
  bool octave = false;
  std::vector<double> params;  // [gain, freq, decay] per resonance, as sent to the bank
  std::size_t clamped = 0;     // decays shortened by the bandwidth floor
};

// Control side: pose -> gesture state -> simplicial map -> parameter vector.
class ParameterMapper {
 public:
  ParameterMapper(const EngineConfig& config, const ResonanceModel& model, SimplicialMap map);

  const SimplicialMap& map() const { return map_; }
  const MappedParameters& current() const { return current_; }

  const MappedParameters& update(const PoseFrame& pose, std::optional<double> tracked_f0 = std::nullopt);

 private:
  EngineConfig config_;
  double reference_f0_;
  SimplicialMap map_;
  AltitudeState altitude_;
  OctaveToggle toggle_;
  MappedParameters current_;
};

// Audio side: follower, noise injection, resonator bank, normalizer and
// feature tracker. Parameter updates land at block boundaries; level
// tracking and gain smoothing step on a fixed 64-sample grid.
class AudioProcessor {
 public:
  AudioProcessor(const EngineConfig& config, const ResonanceModel& model, double sample_rate);

  double sample_rate() const { return sample_rate_; }
  const ResonatorBank& bank() const { return bank_; }
  const FeatureFrame& features() const { return features_; }
  double input_level() const { return input_level_; }
  double output_level() const { return output_level_; }
  double gain() const { return gain_; }

  RetargetReport retarget(std::span<const double> params) { return bank_.retarget(params); }

  // in and out may not alias. Returns the feature frames completed in
  // this block.
  std::vector<FeatureFrame> process(std::span<const double> in, std::span<double> out);

 private:
  EngineConfig config_;
  double sample_rate_;
  ResonatorBank bank_;
  AmplitudeFollower input_follower_;
  AmplitudeFollower output_follower_;
  Normalizer normalizer_;
  NoiseSource noise_;
  FeatureTracker tracker_;
  FeatureFrame features_;
  std::vector<double> wet_;
  std::vector<double> levels_;
  double input_level_ = 0.0;
  double output_level_ = 0.0;
  double gain_ = 1.0;
};

struct BlockReport {
  double time = 0.0;  // block start, seconds
  FeatureFrame features;
  MappedParameters mapped;
};

// Synchronous composition used for offline rendering: per block the pose
// drives the mapper, the bank is retargeted, then audio is processed.
class Engine {
 public:
  Engine(const EngineConfig& config, const ResonanceModel& model, SimplicialMap map, double sample_rate);

  const ParameterMapper& mapper() const { return mapper_; }
  const AudioProcessor& audio() const { return audio_; }

  BlockReport process(const PoseFrame& pose, std::span<const double> in, std::span<double> out);

 private:
  ParameterMapper mapper_;
  AudioProcessor audio_;
  std::size_t blocks_ = 0;
};

// CSV log, schema v1.
void write_log_header(std::ostream& out, const EngineConfig& config, double sample_rate, std::size_t dimension);
void write_log_row(std::ostream& out, const BlockReport& report);

struct RenderJob {
  std::string input_path;
  std::string trajectory_path;
  std::string model_path;
  std::string map_path;
  std::string output_path;
  std::string log_path;  // empty: <output>.csv
};

struct RenderSummary {
  std::size_t samples = 0;
  std::size_t blocks = 0;
  double sample_rate = 0.0;
  std::size_t retarget_clamps = 0;
  std::string log_path;
};

RenderSummary render_offline(const RenderJob& job, const EngineConfig& config);

struct ValidationReport {
  bool ok = false;
  std::size_t resonances = 0;
  std::size_t clamped_bandwidths = 0;
  std::size_t dropped_resonances = 0;
  std::optional<MeshStats> mesh;
  std::vector<std::string> errors;
  std::vector<std::string> notes;
};

ValidationReport validate(const std::string& model_path, const std::string& map_path, const EngineConfig& config);
void print_report(std::ostream& out, const ValidationReport& report);

}  // namespace resonant
