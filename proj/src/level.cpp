#include "resonant/level.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace resonant {

AmplitudeFollower::AmplitudeFollower(double sample_rate, double lowest_freq_hz)
    : sample_rate_(sample_rate) {
  if (!(sample_rate > 0.0) || !(lowest_freq_hz > 0.0)) {
    throw std::invalid_argument("follower needs a positive sample rate and lowest frequency");
  }
  const auto len = static_cast<std::size_t>(std::ceil(sample_rate / lowest_freq_hz));
  history_.assign(std::max<std::size_t>(len, 1), 0.0);
}

double AmplitudeFollower::level() const {
  if (nonzero_ == 0) return 0.0;
  return std::sqrt(std::max(sum_, 0.0) / static_cast<double>(history_.size()));
}

void AmplitudeFollower::push(double sample) {
  const double sq = sample * sample;
  sum_ += sq - history_[head_];
  if (history_[head_] != 0.0) --nonzero_;
  if (sq != 0.0) ++nonzero_;
  history_[head_] = sq;
  if (++head_ == history_.size()) {
    head_ = 0;
    // Resum once per window so rounding in the running sum cannot accumulate.
    sum_ = 0.0;
    for (double v : history_) sum_ += v;
  }
}

double AmplitudeFollower::follow(std::span<const double> block) {
  for (double x : block) push(x);
  return level();
}

void AmplitudeFollower::reset() {
  std::fill(history_.begin(), history_.end(), 0.0);
  head_ = 0;
  sum_ = 0.0;
  nonzero_ = 0;
}

Normalizer::Normalizer(double time_constant_s, double epsilon, double initial_gain)
    : time_constant_(time_constant_s), epsilon_(epsilon), gain_(initial_gain) {
  if (!(time_constant_s > 0.0) || !(epsilon > 0.0) || !(initial_gain >= 0.0)) {
    throw std::invalid_argument("invalid normalizer settings");
  }
}

void Normalizer::set_time_constant(double seconds) {
  if (!(seconds > 0.0)) throw std::invalid_argument("time constant must be positive");
  time_constant_ = seconds;
}

double Normalizer::target_gain(double input_level, double output_level) const {
  const double in = std::isfinite(input_level) ? std::max(input_level, 0.0) : 0.0;
  const double out = std::isfinite(output_level) ? output_level : 0.0;
  return in / std::max(out, epsilon_);
}

double Normalizer::normalize(double input_level, double output_level, double dt) {
  const double target = target_gain(input_level, output_level);
  const double alpha = 1.0 - std::exp(-std::max(dt, 0.0) / time_constant_);
  gain_ += alpha * (target - gain_);
  return gain_;
}

void inject_noise(std::span<double> block, double input_level, double mix, NoiseSource& noise) {
  const double amount = mix * input_level;
  if (amount == 0.0) return;
  for (double& x : block) x += amount * noise.next();
}

BandwidthClamp clamp_bandwidths(const ResonanceModel& model, double min_bandwidth_hz) {
  if (!(min_bandwidth_hz > 0.0)) throw std::invalid_argument("minimum bandwidth must be positive");
  const double max_decay = decay_from_bandwidth(min_bandwidth_hz);
  std::vector<double> decays;
  decays.reserve(model.size());
  std::size_t clamped = 0;
  for (const auto& r : model.authored()) {
    if (r.bandwidth() < min_bandwidth_hz) {
      decays.push_back(max_decay);
      ++clamped;
    } else {
      decays.push_back(r.decay_t60);
    }
  }
  if (clamped == 0) return {model, 0};
  return {with_decays(model, decays), clamped};
}

std::size_t clamp_bandwidths(std::span<double> params, double min_bandwidth_hz) {
  if (!(min_bandwidth_hz > 0.0)) throw std::invalid_argument("minimum bandwidth must be positive");
  if (params.size() % 3 != 0) throw std::invalid_argument("parameter vector length must be a multiple of 3");
  const double max_decay = decay_from_bandwidth(min_bandwidth_hz);
  std::size_t clamped = 0;
  for (std::size_t i = 2; i < params.size(); i += 3) {
    if (params[i] > max_decay) {
      params[i] = max_decay;
      ++clamped;
    }
  }
  return clamped;
}

}  // namespace resonant
