#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "resonant/config.hpp"
#include "resonant/engine.hpp"
#include "resonant/protocol.hpp"
#include "resonant/trajectory.hpp"
#include "resonant/transport.hpp"

namespace resonant {

// Mutex-guarded FIFO; consumers drain without blocking.
template <typename T>
class MessageQueue {
 public:
  void push(T value) {
    std::lock_guard lock(mutex_);
    items_.push_back(std::move(value));
  }

  std::vector<T> drain() {
    std::lock_guard lock(mutex_);
    std::vector<T> out(std::make_move_iterator(items_.begin()), std::make_move_iterator(items_.end()));
    items_.clear();
    return out;
  }

 private:
  std::mutex mutex_;
  std::deque<T> items_;
};

// Control-loop state: pose, latest features, parameter mapping and the
// subscription server. Owned by exactly one thread; step() is the whole
// per-tick update so it can also be driven by a simulated clock.
class ControlLoop {
 public:
  ControlLoop(const EngineConfig& config, const ResonanceModel& model, SimplicialMap map,
              std::optional<Trajectory> trajectory);
  ControlLoop(const ControlLoop&) = delete;
  ControlLoop& operator=(const ControlLoop&) = delete;

  ControlServer& server() { return server_; }
  const ParameterCatalog& catalog() const { return catalog_; }
  const MappedParameters& mapped() const { return mapper_.current(); }
  const PoseFrame& pose() const { return pose_; }

  void set_features(const FeatureFrame& frame) { features_ = frame; }
  // Handles one inbound message from endpoint.
  std::vector<ControlServer::Outgoing> receive(const std::string& endpoint, const ControlMessage& msg);
  // Advances the pose to now_ms, remaps parameters and emits due reports.
  std::vector<ControlServer::Outgoing> step(std::int64_t now_ms);

  std::string map_json() const;

 private:
  void apply_input(const ControlMessage& msg);

  EngineConfig config_;
  ParameterMapper mapper_;
  std::optional<Trajectory> trajectory_;
  bool protocol_pose_ = false;
  PoseFrame pose_;
  FeatureFrame features_;
  ParameterCatalog catalog_;
  ControlServer server_;
};

// Threads: audio (paced blocks from a looped file), control (ticks every
// control_tick_ms) and network (UDP + JSON bridge receive). They share
// nothing but message queues.
class LiveServer {
 public:
  explicit LiveServer(EngineConfig config);
  ~LiveServer();
  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  std::uint16_t udp_port() const { return udp_->port(); }
  std::uint16_t bridge_port() const { return bridge_->port(); }

  void start();
  void stop();
  bool running() const { return running_; }

 private:
  struct Inbound {
    std::string endpoint;
    ControlMessage message;
  };

  void audio_main();
  void control_main();
  void network_main();
  void send(const ControlServer::Outgoing& out);

  EngineConfig config_;
  ResonanceModel model_;
  std::vector<double> input_;
  double sample_rate_;
  std::unique_ptr<ControlLoop> control_;
  std::unique_ptr<UdpSocket> udp_;
  std::unique_ptr<JsonBridge> bridge_;

  MessageQueue<Inbound> inbox_;
  MessageQueue<FeatureFrame> features_;
  MessageQueue<std::vector<double>> params_;

  std::atomic<bool> running_{false};
  std::thread audio_thread_;
  std::thread control_thread_;
  std::thread network_thread_;
};

}  // namespace resonant
