#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace resonant {

// t60 · bandwidth for every resonance: a pole radius of exp(-pi·B/fs)
// loses 60 dB (a factor of 1000) in exactly t60 seconds.
double coupling_constant();

double bandwidth_from_decay(double decay_t60);
double decay_from_bandwidth(double bandwidth_hz);

struct Resonance {
  double center_freq = 0.0;  // Hz
  double gain = 0.0;         // linear peak gain
  double decay_t60 = 0.0;    // seconds

  double bandwidth() const { return bandwidth_from_decay(decay_t60); }
};

// An ordered set of resonances. Resonances are stored as authored; the
// model is played at tuned_f0, so the sounding frequency of each resonance
// is center_freq · tuned_f0 / reference_f0.
class ResonanceModel {
 public:
  ResonanceModel() = default;
  ResonanceModel(std::string name, std::vector<Resonance> resonances,
                 double reference_f0 = 0.0);

  const std::string& name() const { return name_; }
  std::size_t size() const { return resonances_.size(); }
  double reference_f0() const { return reference_f0_; }
  double tuned_f0() const { return tuned_f0_; }
  double pitch_ratio() const { return tuned_f0_ / reference_f0_; }

  const std::vector<Resonance>& authored() const { return resonances_; }

  // Resonances at the tuned pitch.
  std::vector<Resonance> resonances() const;

  // Flat [gain, freq, decay] layout consumed by ResonatorBank::retarget.
  std::vector<double> parameter_vector() const;

  friend ResonanceModel transpose_model(const ResonanceModel& model,
                                        double target_f0);
  friend ResonanceModel with_decays(const ResonanceModel& model,
                                    std::span<const double> decays);

 private:
  std::string name_;
  std::vector<Resonance> resonances_;
  double reference_f0_ = 0.0;
  double tuned_f0_ = 0.0;
};

class ModelError : public std::runtime_error {
 public:
  enum class Kind { EmptyModel, Malformed, InvalidFrequency, InvalidGain, InvalidDecay, InvalidHeader };

  ModelError(Kind kind, int line, const std::string& what)
      : std::runtime_error(what), kind_(kind), line_(line) {}

  Kind kind() const { return kind_; }
  // 1-based source line, 0 when not tied to a line.
  int line() const { return line_; }

 private:
  Kind kind_;
  int line_;
};

// Parses the three-column model format:
//   # comment
//   @f0 220
//   <center_freq_hz> <gain_linear> <decay_t60_s>
ResonanceModel parse_model(std::string_view text, std::string name = {});
ResonanceModel load_model(const std::string& path);

// Multiplies every sounding frequency by target_f0 / reference_f0.
// Frequencies are always derived from the authored ones, so transposing
// back to reference_f0 restores them bit for bit.
ResonanceModel transpose_model(const ResonanceModel& model, double target_f0);

// Copy of model with authored decays replaced.
ResonanceModel with_decays(const ResonanceModel& model,
                           std::span<const double> decays);

struct ResonatorCoefficients {
  double a1 = 0.0;     // 2r·cos(w0)
  double a2 = 0.0;     // -r^2
  double scale = 0.0;  // input scale s

  double pole_radius() const;
};

// Two-pole resonator y[n] = s·x[n] + a1·y[n-1] + a2·y[n-2], with s chosen
// so |H(e^{jw0})| equals the resonance gain.
ResonatorCoefficients design_resonator(const Resonance& res, double sample_rate);

struct RetargetReport {
  std::size_t clamped = 0;
};

// A bank of two-pole resonators summed into one output. Retargets take
// effect at the next process() call and ramp the coefficients linearly
// across that block.
class ResonatorBank {
 public:
  ResonatorBank() = default;
  ResonatorBank(const ResonanceModel& model, double sample_rate);

  double sample_rate() const { return sample_rate_; }
  std::size_t size() const { return slots_.size(); }
  // Resonances at or above Nyquist at realization time.
  std::size_t dropped() const { return dropped_; }
  bool ramp_pending() const { return pending_; }

  const ResonatorCoefficients& coefficients(std::size_t i) const {
    return slots_[i].current;
  }

  // params = [gain_0, freq_0, decay_0, gain_1, ...]. Throws
  // std::invalid_argument on a length mismatch; out-of-range values are
  // clamped and counted.
  RetargetReport retarget(std::span<const double> params);

  void process(std::span<const double> input, std::span<double> output);
  void reset();

 private:
  struct Slot {
    ResonatorCoefficients current;
    ResonatorCoefficients target;
    double y1 = 0.0;
    double y2 = 0.0;
  };

  double sample_rate_ = 44100.0;
  std::vector<Slot> slots_;
  std::size_t dropped_ = 0;
  bool pending_ = false;
};

}  // namespace resonant
