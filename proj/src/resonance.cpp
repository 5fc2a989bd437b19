#include "resonant/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>

namespace resonant {

namespace {

// Retargeted frequencies are clamped into [kMinFreqHz, kMaxFreqFraction·fs].
constexpr double kMinFreqHz = 1.0;
constexpr double kMaxFreqFraction = 0.499;
constexpr double kMinDecay = 1e-4;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string at_line(int line, const std::string& msg) {
  return "line " + std::to_string(line) + ": " + msg;
}

}  // namespace

double coupling_constant() { return std::log(1000.0) / std::numbers::pi; }

double bandwidth_from_decay(double decay_t60) {
  if (!(decay_t60 > 0.0)) throw std::invalid_argument("decay time must be positive");
  return coupling_constant() / decay_t60;
}

double decay_from_bandwidth(double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  return coupling_constant() / bandwidth_hz;
}

ResonanceModel::ResonanceModel(std::string name, std::vector<Resonance> resonances,
                               double reference_f0)
    : name_(std::move(name)), resonances_(std::move(resonances)) {
  if (resonances_.empty()) throw ModelError(ModelError::Kind::EmptyModel, 0, "empty resonance model");
  for (const auto& r : resonances_) {
    if (!(r.center_freq > 0.0) || !std::isfinite(r.center_freq))
      throw ModelError(ModelError::Kind::InvalidFrequency, 0, "non-positive center frequency");
    if (!(r.gain >= 0.0) || !std::isfinite(r.gain))
      throw ModelError(ModelError::Kind::InvalidGain, 0, "negative gain");
    if (!(r.decay_t60 > 0.0) || !std::isfinite(r.decay_t60))
      throw ModelError(ModelError::Kind::InvalidDecay, 0, "non-positive decay time");
  }
  std::stable_sort(resonances_.begin(), resonances_.end(),
                   [](const Resonance& a, const Resonance& b) { return a.center_freq < b.center_freq; });
  if (reference_f0 == 0.0) reference_f0 = resonances_.front().center_freq;
  if (!(reference_f0 > 0.0)) throw ModelError(ModelError::Kind::InvalidHeader, 0, "reference f0 must be positive");
  reference_f0_ = reference_f0;
  tuned_f0_ = reference_f0;
}

std::vector<Resonance> ResonanceModel::resonances() const {
  if (tuned_f0_ == reference_f0_) return resonances_;
  const double ratio = pitch_ratio();
  std::vector<Resonance> out = resonances_;
  for (auto& r : out) r.center_freq *= ratio;
  return out;
}

std::vector<double> ResonanceModel::parameter_vector() const {
  std::vector<double> v;
  v.reserve(3 * size());
  for (const auto& r : resonances()) {
    v.push_back(r.gain);
    v.push_back(r.center_freq);
    v.push_back(r.decay_t60);
  }
  return v;
}

ResonanceModel parse_model(std::string_view text, std::string name) {
  std::vector<Resonance> resonances;
  double reference_f0 = 0.0;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = trim(raw);
    if (line.empty()) continue;

    std::istringstream in{std::string(line)};
    if (line.front() == '@') {
      std::string key;
      double value = 0.0;
      in >> key >> value;
      std::string extra;
      if (key != "@f0" || in.fail() || (in >> extra)) {
        throw ModelError(ModelError::Kind::InvalidHeader, line_no, at_line(line_no, "expected '@f0 <hz>'"));
      }
      if (!(value > 0.0)) {
        throw ModelError(ModelError::Kind::InvalidHeader, line_no, at_line(line_no, "reference f0 must be positive"));
      }
      reference_f0 = value;
      continue;
    }

    Resonance r;
    std::string extra;
    in >> r.center_freq >> r.gain >> r.decay_t60;
    if (in.fail() || (in >> extra)) {
      throw ModelError(ModelError::Kind::Malformed, line_no,
                       at_line(line_no, "expected 'center_freq_hz gain decay_t60_s'"));
    }
    if (!(r.center_freq > 0.0) || !std::isfinite(r.center_freq))
      throw ModelError(ModelError::Kind::InvalidFrequency, line_no, at_line(line_no, "frequency must be positive"));
    if (!(r.gain >= 0.0) || !std::isfinite(r.gain))
      throw ModelError(ModelError::Kind::InvalidGain, line_no, at_line(line_no, "gain must be non-negative"));
    if (!(r.decay_t60 > 0.0) || !std::isfinite(r.decay_t60))
      throw ModelError(ModelError::Kind::InvalidDecay, line_no, at_line(line_no, "decay time must be positive"));
    resonances.push_back(r);
  }
  if (resonances.empty()) throw ModelError(ModelError::Kind::EmptyModel, 0, "empty resonance model");
  return ResonanceModel(std::move(name), std::move(resonances), reference_f0);
}

ResonanceModel load_model(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << file.rdbuf();
  auto stem = path.substr(path.find_last_of('/') + 1);
  return parse_model(buf.str(), stem.substr(0, stem.find_last_of('.')));
}

ResonanceModel transpose_model(const ResonanceModel& model, double target_f0) {
  if (!(target_f0 > 0.0)) throw std::invalid_argument("target f0 must be positive");
  ResonanceModel out = model;
  out.tuned_f0_ = target_f0;
  return out;
}

ResonanceModel with_decays(const ResonanceModel& model, std::span<const double> decays) {
  if (decays.size() != model.size()) throw std::invalid_argument("decay count does not match model size");
  ResonanceModel out = model;
  for (std::size_t i = 0; i < decays.size(); ++i) {
    if (!(decays[i] > 0.0)) throw std::invalid_argument("decay time must be positive");
    out.resonances_[i].decay_t60 = decays[i];
  }
  return out;
}

double ResonatorCoefficients::pole_radius() const { return std::sqrt(-a2); }

ResonatorCoefficients design_resonator(const Resonance& res, double sample_rate) {
  if (!(res.center_freq > 0.0) || !(res.center_freq < 0.5 * sample_rate)) {
    throw std::out_of_range("center frequency must lie in (0, sample_rate/2)");
  }
  const double w0 = 2.0 * std::numbers::pi * res.center_freq / sample_rate;
  const double r = std::exp(-std::numbers::pi * res.bandwidth() / sample_rate);
  ResonatorCoefficients c;
  c.a1 = 2.0 * r * std::cos(w0);
  c.a2 = -r * r;
  const std::complex<double> z1 = std::polar(1.0, -w0);
  const std::complex<double> denom = 1.0 - c.a1 * z1 - c.a2 * z1 * z1;
  c.scale = res.gain * std::abs(denom);
  return c;
}

ResonatorBank::ResonatorBank(const ResonanceModel& model, double sample_rate)
    : sample_rate_(sample_rate) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
  const auto resonances = model.resonances();
  slots_.resize(resonances.size());
  for (std::size_t i = 0; i < resonances.size(); ++i) {
    if (resonances[i].center_freq >= 0.5 * sample_rate) {
      ++dropped_;
      continue;
    }
    slots_[i].current = design_resonator(resonances[i], sample_rate);
    slots_[i].target = slots_[i].current;
  }
}

RetargetReport ResonatorBank::retarget(std::span<const double> params) {
  if (params.size() != 3 * slots_.size()) {
    throw std::invalid_argument("parameter vector has length " + std::to_string(params.size()) + ", expected " +
                                std::to_string(3 * slots_.size()));
  }
  RetargetReport report;
  const double max_freq = kMaxFreqFraction * sample_rate_;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    Resonance r{params[3 * i + 1], params[3 * i], params[3 * i + 2]};
    bool clamped = false;
    if (!(r.center_freq >= kMinFreqHz)) {
      r.center_freq = kMinFreqHz;
      clamped = true;
    } else if (r.center_freq > max_freq) {
      r.center_freq = max_freq;
      clamped = true;
    }
    if (!(r.gain >= 0.0)) {
      r.gain = 0.0;
      clamped = true;
    }
    if (!(r.decay_t60 >= kMinDecay)) {
      r.decay_t60 = kMinDecay;
      clamped = true;
    }
    if (clamped) ++report.clamped;
    const auto next = design_resonator(r, sample_rate_);
    auto& slot = slots_[i];
    if (next.a1 != slot.current.a1 || next.a2 != slot.current.a2 || next.scale != slot.current.scale) {
      pending_ = true;
    }
    slot.target = next;
  }
  return report;
}

void ResonatorBank::process(std::span<const double> input, std::span<double> output) {
  if (output.size() != input.size()) throw std::invalid_argument("input and output blocks differ in length");
  std::fill(output.begin(), output.end(), 0.0);
  const std::size_t n = input.size();
  if (n == 0) return;

  if (!pending_) {
    for (auto& s : slots_) {
      const auto& c = s.current;
      double y1 = s.y1;
      double y2 = s.y2;
      for (std::size_t k = 0; k < n; ++k) {
        const double y = c.scale * input[k] + c.a1 * y1 + c.a2 * y2;
        y2 = y1;
        y1 = y;
        output[k] += y;
      }
      s.y1 = y1;
      s.y2 = y2;
    }
    return;
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& s : slots_) {
    const auto& from = s.current;
    const auto& to = s.target;
    double y1 = s.y1;
    double y2 = s.y2;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k + 1) * inv_n;
      const double a1 = from.a1 + (to.a1 - from.a1) * t;
      const double a2 = from.a2 + (to.a2 - from.a2) * t;
      const double scale = from.scale + (to.scale - from.scale) * t;
      const double y = scale * input[k] + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = y;
      output[k] += y;
    }
    s.y1 = y1;
    s.y2 = y2;
    s.current = s.target;
  }
  pending_ = false;
}

void ResonatorBank::reset() {
  for (auto& s : slots_) {
    s.y1 = 0.0;
    s.y2 = 0.0;
    s.current = s.target;
  }
  pending_ = false;
}

}  // namespace resonant
