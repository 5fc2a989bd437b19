#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace resonant {

struct UdpEndpoint {
  std::string host;
  std::uint16_t port = 0;

  // "udp:<host>:<port>"
  std::string str() const;
  static std::optional<UdpEndpoint> parse(const std::string& endpoint);
};

struct Datagram {
  std::vector<std::uint8_t> bytes;
  UdpEndpoint from;
};

// Blocking IPv4 UDP socket. Port 0 binds an ephemeral port.
class UdpSocket {
 public:
  UdpSocket(const std::string& host, std::uint16_t port);
  ~UdpSocket();
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;

  std::uint16_t port() const { return port_; }
  void send_to(const UdpEndpoint& to, std::span<const std::uint8_t> bytes);
  std::optional<Datagram> receive(int timeout_ms);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// Newline-delimited JSON over TCP. Each accepted connection gets an id;
// lines and disconnects come back from poll().
class JsonBridge {
 public:
  struct Event {
    int client = 0;
    std::optional<std::string> line;  // empty when the client closed
  };

  JsonBridge(const std::string& host, std::uint16_t port);
  ~JsonBridge();
  JsonBridge(const JsonBridge&) = delete;
  JsonBridge& operator=(const JsonBridge&) = delete;

  std::uint16_t port() const { return port_; }
  std::vector<Event> poll(int timeout_ms);
  bool send(int client, const std::string& line);
  std::size_t client_count() const;

 private:
  struct Client {
    int fd = -1;
    std::string pending;
  };

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  int next_id_ = 1;
  mutable std::mutex mutex_;
  std::map<int, Client> clients_;
};

// Blocking line client for the JSON bridge.
class JsonBridgeClient {
 public:
  JsonBridgeClient(const std::string& host, std::uint16_t port);
  ~JsonBridgeClient();
  JsonBridgeClient(const JsonBridgeClient&) = delete;
  JsonBridgeClient& operator=(const JsonBridgeClient&) = delete;

  void send_line(const std::string& line);
  std::optional<std::string> read_line(int timeout_ms);

 private:
  int fd_ = -1;
  std::string pending_;
};

}  // namespace resonant
