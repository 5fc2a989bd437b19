#include "resonant/live.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "resonant/wav.hpp"

namespace resonant {

namespace {

std::optional<double> numeric(const Arg& arg) {
  if (const auto* i = std::get_if<std::int32_t>(&arg)) return *i;
  if (const auto* f = std::get_if<float>(&arg)) return *f;
  return std::nullopt;
}

double& pose_slot(PoseFrame& pose, std::size_t index) {
  SensorPose& sensor = index < 6 ? pose.violin : pose.bow;
  const std::size_t k = index % 6;
  return k < 3 ? sensor.position[k] : sensor.orientation[k - 3];
}

float optional_value(const std::optional<double>& v) {
  return v ? static_cast<float>(*v) : std::numeric_limits<float>::quiet_NaN();
}

}  // namespace

ControlLoop::ControlLoop(const EngineConfig& config, const ResonanceModel& model, SimplicialMap map,
                         std::optional<Trajectory> trajectory)
    : config_(config),
      mapper_(config, model, std::move(map)),
      trajectory_(std::move(trajectory)),
      server_(catalog_) {
  if (trajectory_) {
    pose_ = trajectory_->sample(0.0, config_.interpolation);
  } else {
    // Centre of the authored domain at normal playing altitude.
    Point2 centre;
    for (const auto& p : mapper_.map().domain()) {
      centre.x += p.x;
      centre.y += p.y;
    }
    const double n = static_cast<double>(mapper_.map().size());
    pose_slot(pose_, static_cast<std::size_t>(config_.lat_axis)) = centre.x / n;
    pose_slot(pose_, static_cast<std::size_t>(config_.lon_axis)) = centre.y / n;
    pose_slot(pose_, static_cast<std::size_t>(config_.alt_axis)) = config_.altitude.normal_altitude;
  }
  mapper_.update(pose_);

  const std::string param(addr::kParam);
  catalog_.add(param + "Amplitude", [this] { return std::vector<float>{static_cast<float>(features_.amplitude)}; });
  catalog_.add(param + "Pitch", [this] { return std::vector<float>{optional_value(features_.f0)}; });
  catalog_.add(param + "Centroid", [this] { return std::vector<float>{optional_value(features_.centroid)}; });
  const auto& names = pose_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    catalog_.add(param + names[i], [this, i] { return std::vector<float>{static_cast<float>(pose_slot(pose_, i))}; });
  }
  catalog_.add(std::string(addr::kVector), [this] {
    const auto& p = mapper_.current().params;
    return std::vector<float>(p.begin(), p.end());
  });

  server_.on_input([this](const ControlMessage& msg) { apply_input(msg); });
  server_.on_map_request([this] { return map_json(); });
}

void ControlLoop::apply_input(const ControlMessage& msg) {
  const std::string name = msg.address.substr(addr::kInput.size());
  std::vector<double> values;
  for (const auto& a : msg.args) {
    const auto v = numeric(a);
    if (!v || !std::isfinite(*v)) {
      spdlog::warn("ignoring {}: non-numeric argument", msg.address);
      return;
    }
    values.push_back(*v);
  }
  const auto& names = pose_names();
  if (name == "Pose") {
    if (values.size() != names.size()) {
      spdlog::warn("ignoring {}: expected {} values", msg.address, names.size());
      return;
    }
    for (std::size_t i = 0; i < values.size(); ++i) pose_slot(pose_, i) = values[i];
  } else {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end() || values.size() != 1) {
      spdlog::warn("ignoring {}: unknown input or wrong argument count", msg.address);
      return;
    }
    pose_slot(pose_, static_cast<std::size_t>(it - names.begin())) = values[0];
  }
  protocol_pose_ = true;
}

std::vector<ControlServer::Outgoing> ControlLoop::receive(const std::string& endpoint, const ControlMessage& msg) {
  return server_.handle(endpoint, msg);
}

std::vector<ControlServer::Outgoing> ControlLoop::step(std::int64_t now_ms) {
  const double t = static_cast<double>(now_ms) / 1000.0;
  if (trajectory_ && !protocol_pose_) pose_ = trajectory_->sample_looped(t, config_.interpolation);
  pose_.time = t;
  mapper_.update(pose_, features_.f0);
  return server_.tick(now_ms);
}

std::string ControlLoop::map_json() const {
  const auto& map = mapper_.map();
  nlohmann::json vertices = nlohmann::json::array();
  nlohmann::json codomain = nlohmann::json::array();
  for (std::size_t i = 0; i < map.size(); ++i) {
    vertices.push_back({map.domain()[i].x, map.domain()[i].y});
    const auto row = map.codomain(i);
    codomain.push_back(std::vector<double>(row.begin(), row.end()));
  }
  nlohmann::json triangles = nlohmann::json::array();
  for (const auto& t : map.triangles()) triangles.push_back({t[0], t[1], t[2]});
  return nlohmann::json{{"dimension", map.dimension()},
                        {"vertices", vertices},
                        {"triangles", triangles},
                        {"codomain", codomain}}
      .dump();
}

LiveServer::LiveServer(EngineConfig config) : config_(std::move(config)) {
  check_config(config_);
  model_ = load_model(config_.model_path);
  auto map = load_map(config_.map_path);
  std::optional<Trajectory> trajectory;
  if (!config_.trajectory_path.empty()) trajectory = load_trajectory(config_.trajectory_path);

  sample_rate_ = config_.sample_rate;
  spdlog::warn("live audio devices are not supported; using the file loop");
  if (!config_.input_path.empty()) {
    auto wav = read_wav(config_.input_path);
    sample_rate_ = wav.sample_rate;
    input_ = std::move(wav.samples);
  }
  if (input_.empty()) {
    spdlog::warn("no audio input configured; processing silence");
    input_.assign(config_.block_size, 0.0);
  }
  config_.sample_rate = sample_rate_;

  control_ = std::make_unique<ControlLoop>(config_, model_, std::move(map), std::move(trajectory));
  udp_ = std::make_unique<UdpSocket>(config_.bind_host, config_.udp_port);
  bridge_ = std::make_unique<JsonBridge>("127.0.0.1", config_.bridge_port);
}

LiveServer::~LiveServer() { stop(); }

void LiveServer::start() {
  if (running_.exchange(true)) return;
  spdlog::info("serving on udp {} and bridge {}", udp_port(), bridge_port());
  network_thread_ = std::thread([this] { network_main(); });
  control_thread_ = std::thread([this] { control_main(); });
  audio_thread_ = std::thread([this] { audio_main(); });
}

void LiveServer::stop() {
  running_ = false;
  for (auto* t : {&audio_thread_, &control_thread_, &network_thread_}) {
    if (t->joinable()) t->join();
  }
}

void LiveServer::send(const ControlServer::Outgoing& out) {
  if (const auto udp = UdpEndpoint::parse(out.endpoint)) {
    udp_->send_to(*udp, encode(out.message));
  } else if (out.endpoint.starts_with("json:")) {
    bridge_->send(std::stoi(out.endpoint.substr(5)), encode_json(out.message));
  }
}

void LiveServer::audio_main() {
  using clock = std::chrono::steady_clock;
  AudioProcessor audio(config_, model_, sample_rate_);
  std::optional<WavWriter> recorder;
  if (!config_.record_path.empty()) recorder.emplace(config_.record_path, static_cast<std::uint32_t>(sample_rate_));

  const std::size_t n = config_.block_size;
  std::vector<double> in(n), out(n);
  std::size_t pos = 0;
  const auto block = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(static_cast<double>(n) / sample_rate_));
  auto next = clock::now();
  while (running_) {
    auto updates = params_.drain();
    if (!updates.empty()) audio.retarget(updates.back());
    for (std::size_t k = 0; k < n; ++k) {
      in[k] = input_[pos];
      pos = (pos + 1) % input_.size();
    }
    for (auto& frame : audio.process(in, out)) features_.push(frame);
    if (recorder) recorder->write(out);
    next += block;
    std::this_thread::sleep_until(next);
  }
  if (recorder) recorder->finish();
}

void LiveServer::control_main() {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  for (std::int64_t k = 0; running_; ++k) {
    const std::int64_t now_ms = k * config_.control_tick_ms;
    std::this_thread::sleep_until(start + std::chrono::milliseconds(now_ms));
    for (const auto& in : inbox_.drain()) {
      for (const auto& out : control_->receive(in.endpoint, in.message)) send(out);
    }
    auto frames = features_.drain();
    if (!frames.empty()) control_->set_features(frames.back());
    const auto reports = control_->step(now_ms);
    params_.push(control_->mapped().params);
    for (const auto& out : reports) send(out);
  }
}

void LiveServer::network_main() {
  while (running_) {
    if (auto dgram = udp_->receive(5)) {
      const auto endpoint = dgram->from.str();
      try {
        inbox_.push({endpoint, decode(dgram->bytes)});
      } catch (const ProtocolError& e) {
        spdlog::warn("bad packet from {}: {}", endpoint, e.what());
        udp_->send_to(dgram->from, encode(error_reply("/", e.what())));
      }
    }
    for (auto& event : bridge_->poll(5)) {
      const std::string endpoint = "json:" + std::to_string(event.client);
      if (!event.line) {
        inbox_.push({endpoint, {std::string(addr::kDisconnect), {}}});
        continue;
      }
      try {
        inbox_.push({endpoint, decode_json(*event.line)});
      } catch (const ProtocolError& e) {
        bridge_->send(event.client, encode_json(error_reply("/", e.what())));
      }
    }
  }
}

}  // namespace resonant
