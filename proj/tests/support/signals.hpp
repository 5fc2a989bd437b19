#pragma once

// Signal generators and measurements shared by the test suites. These
// helpers never call into the library so they can serve as oracles.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace testsig {

inline std::vector<double> sine(double freq, double fs, std::size_t n, double amp = 1.0, double phase = 0.0) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs + phase);
  return out;
}

// Harmonic tone: partial k has frequency k·f0 and amplitude amps[k-1].
inline std::vector<double> harmonic(double f0, double fs, std::size_t n, std::span<const double> amps, double scale = 1.0) {
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < amps.size(); ++k) {
    const double f = f0 * static_cast<double>(k + 1);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] += scale * amps[k] * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs);
    }
  }
  return out;
}

inline double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

inline double peak(std::span<const double> x) {
  double p = 0.0;
  for (double v : x) p = std::max(p, std::abs(v));
  return p;
}

inline double db(double ratio) { return 20.0 * std::log10(ratio); }

// Direct-form two-pole recursion with fixed coefficients, written out
// independently of the library's bank.
inline std::vector<double> two_pole(std::span<const double> x, double s, double a1, double a2) {
  std::vector<double> y(x.size());
  double y1 = 0.0, y2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = s * x[i] + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y[i];
  }
  return y;
}

// |H(e^{jw})| of s / (1 - a1 z^-1 - a2 z^-2).
inline double two_pole_gain(double s, double a1, double a2, double w) {
  const std::complex<double> z1 = std::polar(1.0, -w);
  return std::abs(s / (1.0 - a1 * z1 - a2 * z1 * z1));
}

// Time for the envelope to fall 60 dB, from a least-squares line through
// the per-period peak levels (in dB) of a ringing signal.
inline double measured_t60(std::span<const double> y, double fs, double freq, double floor_db = -80.0) {
  const auto period = static_cast<std::size_t>(std::ceil(fs / freq));
  const double top = peak(y);
  std::vector<double> t, level;
  for (std::size_t start = 0; start + period <= y.size(); start += period) {
    const double p = peak(y.subspan(start, period));
    const double l = db(p / top);
    if (l < floor_db) break;
    t.push_back((static_cast<double>(start) + 0.5 * static_cast<double>(period)) / fs);
    level.push_back(l);
  }
  const double n = static_cast<double>(t.size());
  double st = 0, sl = 0, stt = 0, stl = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sl += level[i];
    stt += t[i] * t[i];
    stl += t[i] * level[i];
  }
  const double slope = (n * stl - st * sl) / (n * stt - st * st);
  return -60.0 / slope;
}

}  // namespace testsig
