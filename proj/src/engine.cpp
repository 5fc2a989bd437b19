#include "resonant/engine.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "resonant/trajectory.hpp"
#include "resonant/wav.hpp"

namespace resonant {

namespace {

constexpr std::size_t kLevelHop = 64;

std::string num(double v) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return ec == std::errc() ? std::string(buf.data(), end) : std::string("nan");
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

}  // namespace

DimensionError::DimensionError(std::size_t expected, std::size_t actual)
    : std::runtime_error("map dimension " + std::to_string(actual) + " does not match model: expected " +
                         std::to_string(expected) + " (3 per resonance), found " + std::to_string(actual)),
      expected_(expected),
      actual_(actual) {}

void check_dimensions(const ResonanceModel& model, const SimplicialMap& map) {
  if (map.dimension() != 3 * model.size()) throw DimensionError(3 * model.size(), map.dimension());
}

ParameterMapper::ParameterMapper(const EngineConfig& config, const ResonanceModel& model, SimplicialMap map)
    : config_(config),
      reference_f0_(model.reference_f0()),
      map_(std::move(map)),
      altitude_(config.altitude),
      toggle_(config.toggle_threshold, config.toggle_hysteresis) {
  check_dimensions(model, map_);
  current_.params = model.parameter_vector();
}

const MappedParameters& ParameterMapper::update(const PoseFrame& pose, std::optional<double> tracked_f0) {
  const auto& p = pose.violin.position;
  current_.position = {p[static_cast<int>(config_.lat_axis)], p[static_cast<int>(config_.lon_axis)]};
  current_.altitude = p[static_cast<int>(config_.alt_axis)];
  current_.altitude_control = altitude_.update(current_.altitude);
  current_.octave = toggle_.update(current_.altitude);

  auto& params = current_.params;
  params.resize(map_.dimension());
  map_.interpolate(current_.position, params);

  if (config_.altitude_mode == AltitudeMode::DecayScale && current_.altitude_control > 0.0) {
    const double scale = 1.0 + config_.decay_scale_depth * current_.altitude_control;
    for (std::size_t i = 2; i < params.size(); i += 3) params[i] *= scale;
  }
  double ratio = 1.0;
  if (config_.altitude_mode == AltitudeMode::Octave && current_.octave) ratio *= 2.0;
  if (config_.pitch_follow && tracked_f0 && *tracked_f0 > 0.0) ratio *= *tracked_f0 / reference_f0_;
  if (ratio != 1.0) {
    for (std::size_t i = 1; i < params.size(); i += 3) params[i] *= ratio;
  }
  current_.clamped = clamp_bandwidths(std::span<double>(params), config_.min_bandwidth_hz);
  return current_;
}

AudioProcessor::AudioProcessor(const EngineConfig& config, const ResonanceModel& model, double sample_rate)
    : config_(config),
      sample_rate_(sample_rate),
      bank_(clamp_bandwidths(model, config.min_bandwidth_hz).model, sample_rate),
      input_follower_(sample_rate, config.lowest_freq_hz),
      output_follower_(sample_rate, config.lowest_freq_hz),
      normalizer_(config.smoothing_ms / 1000.0),
      noise_(config.seed),
      tracker_(sample_rate, TrackerConfig{.lowest_freq_hz = config.lowest_freq_hz}) {
  if (bank_.dropped() > 0) {
    spdlog::warn("{} resonance(s) at or above Nyquist dropped", bank_.dropped());
  }
}

std::vector<FeatureFrame> AudioProcessor::process(std::span<const double> in, std::span<double> out) {
  if (in.size() != out.size()) throw std::invalid_argument("input and output blocks differ in length");
  const std::size_t n = in.size();
  auto frames = tracker_.push(in);
  if (!frames.empty()) features_ = frames.back();

  wet_.assign(in.begin(), in.end());
  levels_.clear();
  for (std::size_t s = 0; s < n; s += kLevelHop) {
    const std::size_t m = std::min(kLevelHop, n - s);
    input_level_ = input_follower_.follow(in.subspan(s, m));
    levels_.push_back(input_level_);
    inject_noise(std::span(wet_).subspan(s, m), input_level_, config_.noise_mix, noise_);
  }
  bank_.process(wet_, out);

  for (std::size_t s = 0, j = 0; s < n; s += kLevelHop, ++j) {
    const std::size_t m = std::min(kLevelHop, n - s);
    const auto chunk = out.subspan(s, m);
    output_level_ = output_follower_.follow(chunk);
    if (!config_.normalize) continue;
    const double from = gain_;
    gain_ = normalizer_.normalize(levels_[j], output_level_, static_cast<double>(m) / sample_rate_);
    for (std::size_t k = 0; k < m; ++k) {
      const double t = static_cast<double>(k + 1) / static_cast<double>(m);
      chunk[k] *= from + (gain_ - from) * t;
    }
  }
  return frames;
}

Engine::Engine(const EngineConfig& config, const ResonanceModel& model, SimplicialMap map, double sample_rate)
    : mapper_(config, model, std::move(map)), audio_(config, model, sample_rate) {}

BlockReport Engine::process(const PoseFrame& pose, std::span<const double> in, std::span<double> out) {
  BlockReport report;
  report.time = pose.time;
  report.mapped = mapper_.update(pose, audio_.features().f0);
  audio_.retarget(report.mapped.params);
  audio_.process(in, out);
  report.features = audio_.features();
  ++blocks_;
  return report;
}

void write_log_header(std::ostream& out, const EngineConfig& config, double sample_rate, std::size_t dimension) {
  out << "# resonant log v1 sample_rate=" << num(sample_rate) << " block_size=" << config.block_size << "\n";
  out << "time_s,f0_hz,amplitude,centroid_hz,lat,lon,altitude_control,octave";
  for (std::size_t i = 0; i < dimension; ++i) out << ",p" << i;
  out << "\n";
}

void write_log_row(std::ostream& out, const BlockReport& r) {
  out << num(r.time) << ',' << opt(r.features.f0) << ',' << num(r.features.amplitude) << ','
      << opt(r.features.centroid) << ',' << num(r.mapped.position.x) << ',' << num(r.mapped.position.y) << ','
      << num(r.mapped.altitude_control) << ',' << (r.mapped.octave ? 1 : 0);
  for (double v : r.mapped.params) out << ',' << num(v);
  out << "\n";
}

RenderSummary render_offline(const RenderJob& job, const EngineConfig& base) {
  const auto wav = read_wav(job.input_path);
  EngineConfig config = base;
  config.sample_rate = wav.sample_rate;
  check_config(config);
  const auto trajectory = load_trajectory(job.trajectory_path);
  const auto model = load_model(job.model_path);
  auto map = load_map(job.map_path);
  Engine engine(config, model, std::move(map), config.sample_rate);

  RenderSummary summary;
  summary.sample_rate = config.sample_rate;
  summary.log_path = job.log_path.empty() ? job.output_path + ".csv" : job.log_path;
  const std::string log_part = summary.log_path + ".part";
  std::ofstream log(log_part, std::ios::trunc);
  if (!log) throw std::runtime_error("cannot write log '" + log_part + "'");
  write_log_header(log, config, config.sample_rate, 3 * model.size());

  std::vector<double> output(wav.samples.size(), 0.0);
  const std::size_t total = wav.samples.size();
  for (std::size_t start = 0; start < total; start += config.block_size) {
    const std::size_t n = std::min(config.block_size, total - start);
    const double t = static_cast<double>(start) / config.sample_rate;
    const auto pose = trajectory.sample(t, config.interpolation);
    const auto report = engine.process(pose, std::span(wav.samples).subspan(start, n),
                                       std::span(output).subspan(start, n));
    summary.retarget_clamps += report.mapped.clamped;
    write_log_row(log, report);
    ++summary.blocks;
  }
  log.close();
  if (!log) throw std::runtime_error("write to '" + log_part + "' failed");

  write_wav(job.output_path, wav.sample_rate, output);
  std::filesystem::rename(log_part, summary.log_path);
  summary.samples = total;
  return summary;
}

ValidationReport validate(const std::string& model_path, const std::string& map_path, const EngineConfig& config) {
  ValidationReport report;
  std::optional<ResonanceModel> model;
  try {
    model = load_model(model_path);
    report.resonances = model->size();
    report.clamped_bandwidths = clamp_bandwidths(*model, config.min_bandwidth_hz).clamped;
    for (const auto& r : model->resonances()) {
      if (r.center_freq >= 0.5 * config.sample_rate) ++report.dropped_resonances;
    }
  } catch (const std::exception& e) {
    report.errors.push_back(std::string("model: ") + e.what());
  }
  std::optional<SimplicialMap> map;
  try {
    map = load_map(map_path);
    report.mesh = map->stats();
  } catch (const std::exception& e) {
    report.errors.push_back(std::string("map: ") + e.what());
  }
  if (model && map) {
    try {
      check_dimensions(*model, *map);
    } catch (const DimensionError& e) {
      report.errors.push_back(e.what());
    }
  }
  if (config.sample_rate / static_cast<double>(config.block_size) < 130.0) {
    report.notes.push_back("block cadence below 130 level reports per second");
  }
  report.ok = report.errors.empty();
  return report;
}

void print_report(std::ostream& out, const ValidationReport& r) {
  out << "resonances: " << r.resonances << "\n";
  out << "clamped bandwidths: " << r.clamped_bandwidths << "\n";
  out << "dropped (>= Nyquist): " << r.dropped_resonances << "\n";
  if (r.mesh) {
    out << "mesh: " << r.mesh->points << " points, " << r.mesh->triangles << " triangles, " << r.mesh->hull_edges
        << " hull edges, " << r.mesh->interior_edges << " interior edges, min area " << r.mesh->min_area << "\n";
  }
  for (const auto& n : r.notes) out << "note: " << n << "\n";
  for (const auto& e : r.errors) out << "error: " << e << "\n";
  out << (r.ok ? "OK" : "FAILED") << "\n";
}

}  // namespace resonant
