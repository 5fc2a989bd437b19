#include "resonant/tracker.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace resonant {

namespace {

// Normalized magnitudes below this are treated as silence.
constexpr double kSilenceFloor = 1e-9;
// A peak must dominate +-2 bins, the half-width of the Hann main lobe, so
// window sidelobes are never reported as partials.
constexpr std::size_t kPeakNeighborhood = 2;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct SpectrumAnalyzer::Impl {
  std::size_t n;
  double sample_rate;
  double threshold;
  std::vector<double> window;
  double norm;
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
  std::vector<double> mag;

  Impl(std::size_t size, double fs, double threshold_db)
      : n(size), sample_rate(fs), threshold(std::pow(10.0, threshold_db / 20.0)), window(size), mag(size / 2 + 1) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
      sum += window[i];
    }
    norm = 2.0 / sum;
    std::lock_guard lock(planner_mutex());
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

SpectrumAnalyzer::SpectrumAnalyzer(std::size_t window, double sample_rate, double threshold_db) {
  if (window < 8 || (window & (window - 1)) != 0) throw std::invalid_argument("analysis window must be a power of two");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
  impl_ = std::make_unique<Impl>(window, sample_rate, threshold_db);
}

SpectrumAnalyzer::~SpectrumAnalyzer() = default;
SpectrumAnalyzer::SpectrumAnalyzer(SpectrumAnalyzer&&) noexcept = default;
SpectrumAnalyzer& SpectrumAnalyzer::operator=(SpectrumAnalyzer&&) noexcept = default;

std::size_t SpectrumAnalyzer::window() const { return impl_->n; }

std::vector<SpectralPeak> SpectrumAnalyzer::analyze(std::span<const double> frame) {
  auto& s = *impl_;
  if (frame.size() != s.n) throw std::invalid_argument("frame length must equal the analysis window");
  for (std::size_t i = 0; i < s.n; ++i) s.in[i] = frame[i] * s.window[i];
  fftw_execute(s.plan);

  const std::size_t bins = s.n / 2 + 1;
  double max_mag = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    s.mag[k] = std::hypot(s.out[k][0], s.out[k][1]) * s.norm;
    max_mag = std::max(max_mag, s.mag[k]);
  }
  std::vector<SpectralPeak> peaks;
  if (max_mag < kSilenceFloor) return peaks;

  const double floor = std::max(max_mag * s.threshold, kSilenceFloor);
  const double bin_hz = s.sample_rate / static_cast<double>(s.n);
  for (std::size_t k = 1; k + 1 < bins; ++k) {
    const double m = s.mag[k];
    if (m < floor || !(m > s.mag[k - 1]) || !(m > s.mag[k + 1])) continue;
    const std::size_t lo = k >= kPeakNeighborhood ? k - kPeakNeighborhood : 0;
    const std::size_t hi = std::min(bins - 1, k + kPeakNeighborhood);
    bool dominant = true;
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j != k && s.mag[j] >= m) dominant = false;
    }
    if (!dominant) continue;

    const double a = std::log(s.mag[k - 1] + 1e-300);
    const double b = std::log(m);
    const double c = std::log(s.mag[k + 1] + 1e-300);
    const double denom = a - 2.0 * b + c;
    const double offset = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
    const double log_peak = b - 0.25 * (a - c) * offset;
    peaks.push_back({(static_cast<double>(k) + offset) * bin_hz, std::exp(2.0 * log_peak)});
  }
  return peaks;
}

PitchEstimate estimate_f0(std::span<const SpectralPeak> peaks_in, const TrackerConfig& config) {
  PitchEstimate result;
  std::vector<SpectralPeak> peaks(peaks_in.begin(), peaks_in.end());
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const SpectralPeak& a, const SpectralPeak& b) { return a.frequency < b.frequency; });
  double total = 0.0;
  for (const auto& p : peaks) total += p.energy;
  if (peaks.empty() || !(total >= config.energy_floor)) return result;

  const double tol = config.tolerance;
  auto matches = [tol](double f, double candidate, double& h) {
    h = std::max(1.0, std::round(f / candidate));
    return std::abs(f - h * candidate) <= tol * h * candidate;
  };

  std::vector<double> candidates;
  for (const auto& p : peaks) {
    for (int h = 1;; ++h) {
      const double candidate = p.frequency / h;
      if (candidate < config.f_min) break;
      if (candidate <= config.f_max) candidates.push_back(candidate);
    }
  }
  if (candidates.empty()) return result;
  std::sort(candidates.begin(), candidates.end());

  // Above harmonic `bulk` every peak lies within tolerance of its nearest
  // harmonic, so those peaks are summed from a prefix table. Below it the
  // tolerance windows are disjoint and tracked with one cursor per
  // harmonic, which only move forward as the candidates ascend.
  const auto bulk = static_cast<std::size_t>(std::ceil(0.5 / tol));
  std::vector<double> prefix(peaks.size() + 1, 0.0);
  for (std::size_t i = 0; i < peaks.size(); ++i) prefix[i + 1] = prefix[i] + peaks[i].energy;
  std::vector<std::size_t> cursor(bulk + 1, 0);
  std::size_t bulk_cursor = 0;
  const double relax = 1e-9;

  double best = -1.0;
  struct Score {
    double candidate;
    double energy;
  };
  std::vector<Score> scores;
  scores.reserve(candidates.size());
  for (double c : candidates) {
    double energy = 0.0;
    std::size_t count = 0;
    for (std::size_t h = 1; h <= bulk; ++h) {
      const double hd = static_cast<double>(h);
      const double lo = c * std::max(hd * (1.0 - tol), hd - 0.5) * (1.0 - relax);
      const double hi = c * std::min(hd * (1.0 + tol), hd + 0.5) * (1.0 + relax);
      auto& i = cursor[h];
      while (i < peaks.size() && peaks[i].frequency < lo) ++i;
      for (std::size_t j = i; j < peaks.size() && peaks[j].frequency <= hi; ++j) {
        double harmonic = 0.0;
        if (matches(peaks[j].frequency, c, harmonic) && harmonic == hd) {
          energy += peaks[j].energy;
          ++count;
        }
      }
    }
    const double bulk_from = c * (static_cast<double>(bulk) + 0.5) * (1.0 + relax);
    while (bulk_cursor < peaks.size() && peaks[bulk_cursor].frequency < bulk_from) ++bulk_cursor;
    for (std::size_t j = cursor[bulk]; j < bulk_cursor; ++j) {
      double harmonic = 0.0;
      if (peaks[j].frequency > c * (static_cast<double>(bulk) + 0.5) * (1.0 - relax) &&
          matches(peaks[j].frequency, c, harmonic) && harmonic > static_cast<double>(bulk)) {
        energy += peaks[j].energy;
        ++count;
      }
    }
    energy += prefix[peaks.size()] - prefix[bulk_cursor];
    count += peaks.size() - bulk_cursor;
    if (count >= 2) {
      scores.push_back({c, energy});
      best = std::max(best, energy);
    }
  }
  if (scores.empty()) return result;

  // Subharmonics of the true f0 match the same partials; among candidates
  // within 1% of the total energy of the best, take the highest.
  const double slack = 0.01 * total;
  double chosen = 0.0;
  for (const auto& s : scores) {
    if (s.energy >= best - slack) chosen = std::max(chosen, s.candidate);
  }

  double weighted = 0.0;
  double weight = 0.0;
  for (const auto& p : peaks) {
    double h = 0.0;
    if (matches(p.frequency, chosen, h)) {
      result.partials.push_back({p.frequency, p.energy, static_cast<int>(h)});
      weighted += p.energy * p.frequency / h;
      weight += p.energy;
    }
  }
  result.f0 = weight > 0.0 ? weighted / weight : chosen;
  result.confidence = std::min(1.0, weight / total);
  return result;
}

std::optional<double> spectral_centroid(std::span<const Partial> partials) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& p : partials) {
    num += p.frequency * p.energy;
    den += p.energy;
  }
  if (partials.empty() || !(den > 0.0)) return std::nullopt;
  return num / den;
}

FeatureTracker::FeatureTracker(double sample_rate, TrackerConfig config)
    : sample_rate_(sample_rate),
      config_(config),
      analyzer_(config.window, sample_rate, config.threshold_db),
      follower_(sample_rate, config.lowest_freq_hz),
      ring_(config.window, 0.0),
      frame_(config.window, 0.0) {
  if (config.hop == 0 || config.hop > config.window) throw std::invalid_argument("hop must lie in [1, window]");
}

std::vector<FeatureFrame> FeatureTracker::push(std::span<const double> block) {
  std::vector<FeatureFrame> frames;
  for (double x : block) {
    ring_[head_] = x;
    head_ = (head_ + 1) % ring_.size();
    follower_.push(x);
    ++consumed_;
    ++since_frame_;
    if (consumed_ >= config_.window && since_frame_ >= config_.hop) {
      frames.push_back(analyze_current());
      since_frame_ = 0;
    }
  }
  return frames;
}

FeatureFrame FeatureTracker::analyze_current() {
  // Oldest sample sits at head_.
  const std::size_t n = ring_.size();
  std::copy(ring_.begin() + static_cast<std::ptrdiff_t>(head_), ring_.end(), frame_.begin());
  std::copy(ring_.begin(), ring_.begin() + static_cast<std::ptrdiff_t>(head_),
            frame_.begin() + static_cast<std::ptrdiff_t>(n - head_));

  FeatureFrame frame;
  frame.time = static_cast<double>(consumed_) / sample_rate_;
  frame.amplitude = follower_.level();
  auto peaks = analyzer_.analyze(frame_);
  if (config_.max_peaks > 0 && peaks.size() > config_.max_peaks) {
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const SpectralPeak& a, const SpectralPeak& b) { return a.energy > b.energy; });
    peaks.resize(config_.max_peaks);
    std::sort(peaks.begin(), peaks.end(),
              [](const SpectralPeak& a, const SpectralPeak& b) { return a.frequency < b.frequency; });
  }
  const auto estimate = estimate_f0(peaks, config_);
  if (estimate.f0) {
    frame.f0 = estimate.f0;
    frame.centroid = spectral_centroid(estimate.partials);
    frame.confidence = estimate.confidence;
  }
  return frame;
}

void FeatureTracker::reset() {
  std::fill(ring_.begin(), ring_.end(), 0.0);
  follower_.reset();
  head_ = 0;
  consumed_ = 0;
  since_frame_ = 0;
}

}  // namespace resonant
