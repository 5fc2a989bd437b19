#include "resonant/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

namespace resonant {

namespace {

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  const std::string h = host == "localhost" ? "127.0.0.1" : host;
  if (inet_pton(AF_INET, h.c_str(), &addr.sin_addr) != 1) {
    throw std::runtime_error("invalid IPv4 address '" + host + "'");
  }
  return addr;
}

std::uint16_t bound_port(int fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  return ntohs(addr.sin_port);
}

std::runtime_error sys_error(const std::string& what) { return std::runtime_error(what + ": " + std::strerror(errno)); }

bool wait_readable(int fd, int timeout_ms) {
  pollfd p{fd, POLLIN, 0};
  return ::poll(&p, 1, timeout_ms) > 0 && (p.revents & (POLLIN | POLLHUP | POLLERR)) != 0;
}

}  // namespace

std::string UdpEndpoint::str() const { return "udp:" + host + ":" + std::to_string(port); }

std::optional<UdpEndpoint> UdpEndpoint::parse(const std::string& endpoint) {
  if (!endpoint.starts_with("udp:")) return std::nullopt;
  const auto colon = endpoint.find_last_of(':');
  if (colon <= 4) return std::nullopt;
  try {
    const int port = std::stoi(endpoint.substr(colon + 1));
    if (port <= 0 || port > 65535) return std::nullopt;
    return UdpEndpoint{endpoint.substr(4, colon - 4), static_cast<std::uint16_t>(port)};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

UdpSocket::UdpSocket(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw sys_error("cannot create UDP socket");
  const auto addr = make_addr(host, port);
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const auto err = sys_error("cannot bind UDP port " + std::to_string(port));
    ::close(fd_);
    throw err;
  }
  port_ = bound_port(fd_);
}

UdpSocket::~UdpSocket() {
  if (fd_ >= 0) ::close(fd_);
}

void UdpSocket::send_to(const UdpEndpoint& to, std::span<const std::uint8_t> bytes) {
  const auto addr = make_addr(to.host, to.port);
  ::sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr));
}

std::optional<Datagram> UdpSocket::receive(int timeout_ms) {
  if (!wait_readable(fd_, timeout_ms)) return std::nullopt;
  std::vector<std::uint8_t> buf(65536);
  sockaddr_in from{};
  socklen_t len = sizeof(from);
  const auto n = ::recvfrom(fd_, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&from), &len);
  if (n < 0) return std::nullopt;
  buf.resize(static_cast<std::size_t>(n));
  char host[INET_ADDRSTRLEN] = {};
  inet_ntop(AF_INET, &from.sin_addr, host, sizeof(host));
  return Datagram{std::move(buf), UdpEndpoint{host, ntohs(from.sin_port)}};
}

JsonBridge::JsonBridge(const std::string& host, std::uint16_t port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw sys_error("cannot create bridge socket");
  int yes = 1;
  setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  const auto addr = make_addr(host, port);
  if (::bind(listen_fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(listen_fd_, 8) != 0) {
    const auto err = sys_error("cannot bind bridge port " + std::to_string(port));
    ::close(listen_fd_);
    throw err;
  }
  port_ = bound_port(listen_fd_);
}

JsonBridge::~JsonBridge() {
  std::lock_guard lock(mutex_);
  for (auto& [id, c] : clients_) ::close(c.fd);
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

std::vector<JsonBridge::Event> JsonBridge::poll(int timeout_ms) {
  std::vector<pollfd> fds{{listen_fd_, POLLIN, 0}};
  std::vector<int> ids{0};
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, c] : clients_) {
      fds.push_back({c.fd, POLLIN, 0});
      ids.push_back(id);
    }
  }
  std::vector<Event> events;
  if (::poll(fds.data(), fds.size(), timeout_ms) <= 0) return events;

  std::lock_guard lock(mutex_);
  if (fds[0].revents & POLLIN) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd >= 0) clients_[next_id_++] = Client{fd, {}};
  }
  for (std::size_t i = 1; i < fds.size(); ++i) {
    if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
    auto it = clients_.find(ids[i]);
    if (it == clients_.end()) continue;
    char buf[4096];
    const auto n = ::recv(it->second.fd, buf, sizeof(buf), 0);
    if (n <= 0) {
      ::close(it->second.fd);
      clients_.erase(it);
      events.push_back({ids[i], std::nullopt});
      continue;
    }
    auto& pending = it->second.pending;
    pending.append(buf, static_cast<std::size_t>(n));
    for (auto nl = pending.find('\n'); nl != std::string::npos; nl = pending.find('\n')) {
      std::string line = pending.substr(0, nl);
      pending.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) events.push_back({ids[i], std::move(line)});
    }
  }
  return events;
}

bool JsonBridge::send(int client, const std::string& line) {
  std::lock_guard lock(mutex_);
  const auto it = clients_.find(client);
  if (it == clients_.end()) return false;
  const std::string data = line + "\n";
  std::size_t sent = 0;
  while (sent < data.size()) {
    const auto n = ::send(it->second.fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

std::size_t JsonBridge::client_count() const {
  std::lock_guard lock(mutex_);
  return clients_.size();
}

JsonBridgeClient::JsonBridgeClient(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw sys_error("cannot create socket");
  const auto addr = make_addr(host, port);
  if (::connect(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const auto err = sys_error("cannot connect to bridge port " + std::to_string(port));
    ::close(fd_);
    throw err;
  }
}

JsonBridgeClient::~JsonBridgeClient() {
  if (fd_ >= 0) ::close(fd_);
}

void JsonBridgeClient::send_line(const std::string& line) {
  const std::string data = line + "\n";
  std::size_t sent = 0;
  while (sent < data.size()) {
    const auto n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) throw sys_error("bridge send failed");
    sent += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> JsonBridgeClient::read_line(int timeout_ms) {
  for (;;) {
    if (const auto nl = pending_.find('\n'); nl != std::string::npos) {
      std::string line = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      return line;
    }
    if (!wait_readable(fd_, timeout_ms)) return std::nullopt;
    char buf[4096];
    const auto n = ::recv(fd_, buf, sizeof(buf), 0);
    if (n <= 0) return std::nullopt;
    pending_.append(buf, static_cast<std::size_t>(n));
  }
}

}  // namespace resonant
