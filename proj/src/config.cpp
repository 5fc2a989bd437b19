#include "resonant/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace resonant {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  const double d = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument("not a number");
  return d;
}

long long to_int(const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("not an integer");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw std::invalid_argument("not a boolean");
}

Axis to_axis(const std::string& v) {
  if (v == "x") return Axis::X;
  if (v == "y") return Axis::Y;
  if (v == "z") return Axis::Z;
  throw std::invalid_argument("axis must be x, y or z");
}

}  // namespace

EngineConfig parse_config(std::string_view text, EngineConfig base) {
  EngineConfig c = std::move(base);
  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"sample_rate", [&](const std::string& v) { c.sample_rate = to_double(v); }},
      {"block_size", [&](const std::string& v) { c.block_size = static_cast<std::size_t>(to_int(v)); }},
      {"control_tick_ms", [&](const std::string& v) { c.control_tick_ms = static_cast<int>(to_int(v)); }},
      {"model", [&](const std::string& v) { c.model_path = v; }},
      {"map", [&](const std::string& v) { c.map_path = v; }},
      {"trajectory", [&](const std::string& v) { c.trajectory_path = v; }},
      {"input", [&](const std::string& v) { c.input_path = v; }},
      {"record", [&](const std::string& v) { c.record_path = v; }},
      {"lowest_freq_hz", [&](const std::string& v) { c.lowest_freq_hz = to_double(v); }},
      {"min_bandwidth_hz", [&](const std::string& v) { c.min_bandwidth_hz = to_double(v); }},
      {"noise_mix", [&](const std::string& v) { c.noise_mix = to_double(v); }},
      {"smoothing_ms", [&](const std::string& v) { c.smoothing_ms = to_double(v); }},
      {"normalize", [&](const std::string& v) { c.normalize = to_bool(v); }},
      {"pitch_follow", [&](const std::string& v) { c.pitch_follow = to_bool(v); }},
      {"normal_altitude", [&](const std::string& v) { c.altitude.normal_altitude = to_double(v); }},
      {"altitude_floor", [&](const std::string& v) { c.altitude.floor_altitude = to_double(v); }},
      {"reset_margin", [&](const std::string& v) { c.altitude.reset_margin = to_double(v); }},
      {"altitude_mode",
       [&](const std::string& v) {
         if (v == "off") {
           c.altitude_mode = AltitudeMode::Off;
         } else if (v == "decay_scale") {
           c.altitude_mode = AltitudeMode::DecayScale;
         } else if (v == "octave") {
           c.altitude_mode = AltitudeMode::Octave;
         } else {
           throw std::invalid_argument("expected off, decay_scale or octave");
         }
       }},
      {"decay_scale_depth", [&](const std::string& v) { c.decay_scale_depth = to_double(v); }},
      {"toggle_threshold", [&](const std::string& v) { c.toggle_threshold = to_double(v); }},
      {"toggle_hysteresis", [&](const std::string& v) { c.toggle_hysteresis = to_double(v); }},
      {"lat_axis", [&](const std::string& v) { c.lat_axis = to_axis(v); }},
      {"lon_axis", [&](const std::string& v) { c.lon_axis = to_axis(v); }},
      {"alt_axis", [&](const std::string& v) { c.alt_axis = to_axis(v); }},
      {"interpolation",
       [&](const std::string& v) {
         if (v == "linear") {
           c.interpolation = Interpolation::Linear;
         } else if (v == "step") {
           c.interpolation = Interpolation::StepHold;
         } else {
           throw std::invalid_argument("expected linear or step");
         }
       }},
      {"bind_host", [&](const std::string& v) { c.bind_host = v; }},
      {"udp_port", [&](const std::string& v) { c.udp_port = static_cast<std::uint16_t>(to_int(v)); }},
      {"bridge_port", [&](const std::string& v) { c.bridge_port = static_cast<std::uint16_t>(to_int(v)); }},
      {"seed", [&](const std::string& v) { c.seed = static_cast<std::uint32_t>(to_int(v)); }},
  };

  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw std::runtime_error("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const std::exception& e) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": bad value for '" + key + "': " + e.what());
    }
  }
  check_config(c);
  return c;
}

EngineConfig load_config(const std::string& path, EngineConfig base) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << file.rdbuf();
  auto config = parse_config(buf.str(), std::move(base));
  // Relative paths resolve against the config file's directory.
  const auto slash = path.find_last_of('/');
  if (slash != std::string::npos) {
    const std::string dir = path.substr(0, slash + 1);
    for (std::string* p : {&config.model_path, &config.map_path, &config.trajectory_path, &config.input_path,
                           &config.record_path}) {
      if (!p->empty() && p->front() != '/') *p = dir + *p;
    }
  }
  return config;
}

void check_config(const EngineConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::runtime_error("invalid config: " + what);
  };
  require(c.sample_rate > 0.0, "sample_rate must be positive");
  require(c.block_size >= 16, "block_size must be at least 16");
  require(c.control_tick_ms >= 1 && c.control_tick_ms <= 50, "control_tick_ms must lie in [1, 50]");
  require(c.lowest_freq_hz > 0.0, "lowest_freq_hz must be positive");
  require(c.min_bandwidth_hz > 0.0, "min_bandwidth_hz must be positive");
  require(c.noise_mix >= 0.0, "noise_mix must be non-negative");
  require(c.smoothing_ms > 0.0, "smoothing_ms must be positive");
  require(c.altitude.floor_altitude < c.altitude.normal_altitude, "altitude_floor must lie below normal_altitude");
  require(c.altitude.reset_margin >= 0.0, "reset_margin must be non-negative");
  require(c.toggle_hysteresis > 0.0, "toggle_hysteresis must be positive");
  require(c.decay_scale_depth >= 0.0, "decay_scale_depth must be non-negative");
  require(c.lat_axis != c.lon_axis && c.lat_axis != c.alt_axis && c.lon_axis != c.alt_axis,
          "lat_axis, lon_axis and alt_axis must be distinct");
}

}  // namespace resonant
