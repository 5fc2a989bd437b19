#include "resonant/protocol.hpp"

#include <spdlog/spdlog.h>

#include <bit>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace resonant {

namespace {

std::size_t padded(std::size_t n) { return (n + 3) & ~std::size_t{3}; }

void put_string(std::vector<std::uint8_t>& out, std::string_view s) {
  out.insert(out.end(), s.begin(), s.end());
  const std::size_t total = padded(s.size() + 1);
  out.resize(out.size() + (total - s.size()), 0);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }
  std::uint8_t peek() const { return bytes_[pos_]; }

  std::string string(const char* what) {
    std::size_t end = pos_;
    while (end < bytes_.size() && bytes_[end] != 0) ++end;
    if (end == bytes_.size()) throw ProtocolError(ProtocolError::Kind::Truncated, std::string(what) + " is not terminated");
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), end - pos_);
    const std::size_t next = pos_ + padded(end - pos_ + 1);
    if (next > bytes_.size()) throw ProtocolError(ProtocolError::Kind::Truncated, std::string(what) + " padding is cut off");
    for (std::size_t i = end; i < next; ++i) {
      if (bytes_[i] != 0) throw ProtocolError(ProtocolError::Kind::BadPadding, std::string(what) + " padding is not NUL");
    }
    pos_ = next;
    return s;
  }

  std::uint32_t u32() {
    if (bytes_.size() - pos_ < 4) throw ProtocolError(ProtocolError::Kind::Truncated, "argument data is cut off");
    const std::uint32_t v = (std::uint32_t{bytes_[pos_]} << 24) | (std::uint32_t{bytes_[pos_ + 1]} << 16) |
                            (std::uint32_t{bytes_[pos_ + 2]} << 8) | std::uint32_t{bytes_[pos_ + 3]};
    pos_ += 4;
    return v;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const std::vector<std::string>& pose_names() {
  static const std::vector<std::string> names{"X",    "Y",    "Z",    "Yaw",    "Pitch2",   "Roll",
                                              "BowX", "BowY", "BowZ", "BowYaw", "BowPitch", "BowRoll"};
  return names;
}

std::vector<std::string> canonical_parameter_addresses() {
  std::vector<std::string> out;
  for (const char* audio : {"Amplitude", "Pitch", "Centroid"}) out.push_back(std::string(addr::kParam) + audio);
  for (const auto& name : pose_names()) out.push_back(std::string(addr::kParam) + name);
  return out;
}

bool valid_address(std::string_view address) {
  if (address.size() < 2 || address.front() != '/' || address.back() == '/') return false;
  char prev = 0;
  for (const char c : address) {
    const auto u = static_cast<unsigned char>(c);
    if (u == 0 || u > 127 || u < 32) return false;
    if (c == '/' && prev == '/') return false;
    prev = c;
  }
  return true;
}

std::vector<std::uint8_t> encode(const ControlMessage& msg) {
  if (!valid_address(msg.address)) throw ProtocolError(ProtocolError::Kind::BadAddress, "invalid address '" + msg.address + "'");
  std::string tags = ",";
  for (const auto& arg : msg.args) {
    if (std::holds_alternative<std::int32_t>(arg)) {
      tags += 'i';
    } else if (std::holds_alternative<float>(arg)) {
      tags += 'f';
    } else {
      if (std::get<std::string>(arg).find('\0') != std::string::npos) {
        throw ProtocolError(ProtocolError::Kind::UnsupportedType, "string argument contains NUL");
      }
      tags += 's';
    }
  }
  std::vector<std::uint8_t> out;
  put_string(out, msg.address);
  put_string(out, tags);
  for (const auto& arg : msg.args) {
    if (const auto* i = std::get_if<std::int32_t>(&arg)) {
      put_u32(out, static_cast<std::uint32_t>(*i));
    } else if (const auto* f = std::get_if<float>(&arg)) {
      put_u32(out, std::bit_cast<std::uint32_t>(*f));
    } else {
      put_string(out, std::get<std::string>(arg));
    }
  }
  return out;
}

ControlMessage decode(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw ProtocolError(ProtocolError::Kind::Truncated, "empty packet");
  if (bytes[0] != '/') throw ProtocolError(ProtocolError::Kind::BadAddress, "address must begin with '/'");
  if (bytes.size() % 4 != 0) throw ProtocolError(ProtocolError::Kind::BadPadding, "packet length is not a multiple of 4");

  Reader in(bytes);
  ControlMessage msg;
  msg.address = in.string("address");
  if (!valid_address(msg.address)) throw ProtocolError(ProtocolError::Kind::BadAddress, "invalid address '" + msg.address + "'");
  if (in.done() || in.peek() != ',') throw ProtocolError(ProtocolError::Kind::MissingTypeTag, "missing ',' type tag");
  const std::string tags = in.string("type tag");
  for (std::size_t i = 1; i < tags.size(); ++i) {
    switch (tags[i]) {
      case 'i':
        msg.args.emplace_back(static_cast<std::int32_t>(in.u32()));
        break;
      case 'f':
        msg.args.emplace_back(std::bit_cast<float>(in.u32()));
        break;
      case 's':
        msg.args.emplace_back(in.string("string argument"));
        break;
      default:
        throw ProtocolError(ProtocolError::Kind::UnsupportedType, std::string("unsupported type tag '") + tags[i] + "'");
    }
  }
  if (!in.done()) throw ProtocolError(ProtocolError::Kind::BadPadding, "trailing bytes after arguments");
  return msg;
}

std::string encode_json(const ControlMessage& msg) {
  nlohmann::json args = nlohmann::json::array();
  for (const auto& arg : msg.args) {
    if (const auto* i = std::get_if<std::int32_t>(&arg)) {
      args.push_back(*i);
    } else if (const auto* f = std::get_if<float>(&arg)) {
      if (std::isfinite(*f)) {
        args.push_back(static_cast<double>(*f));
      } else {
        args.push_back(nullptr);
      }
    } else {
      args.push_back(std::get<std::string>(arg));
    }
  }
  return nlohmann::json{{"address", msg.address}, {"args", std::move(args)}}.dump();
}

ControlMessage decode_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(ProtocolError::Kind::BadJson, e.what());
  }
  if (!doc.is_object() || !doc.contains("address") || !doc["address"].is_string()) {
    throw ProtocolError(ProtocolError::Kind::BadJson, "expected an object with a string 'address'");
  }
  ControlMessage msg;
  msg.address = doc["address"].get<std::string>();
  if (!valid_address(msg.address)) throw ProtocolError(ProtocolError::Kind::BadAddress, "invalid address '" + msg.address + "'");
  if (doc.contains("args")) {
    if (!doc["args"].is_array()) throw ProtocolError(ProtocolError::Kind::BadJson, "'args' must be an array");
    for (const auto& a : doc["args"]) {
      if (a.is_number_integer()) {
        const auto v = a.get<std::int64_t>();
        if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max()) {
          throw ProtocolError(ProtocolError::Kind::UnsupportedType, "integer argument exceeds int32");
        }
        msg.args.emplace_back(static_cast<std::int32_t>(v));
      } else if (a.is_number()) {
        msg.args.emplace_back(a.get<float>());
      } else if (a.is_null()) {
        msg.args.emplace_back(std::numeric_limits<float>::quiet_NaN());
      } else if (a.is_string()) {
        msg.args.emplace_back(a.get<std::string>());
      } else {
        throw ProtocolError(ProtocolError::Kind::UnsupportedType, "unsupported JSON argument");
      }
    }
  }
  return msg;
}

void SubscriptionRegistry::upsert(const std::string& address, std::int32_t interval_ms) {
  auto [it, inserted] = entries_.try_emplace(address, Subscription{address, interval_ms, std::nullopt});
  if (!inserted) it->second.interval_ms = interval_ms;
}

bool SubscriptionRegistry::remove(const std::string& address) { return entries_.erase(address) != 0; }

const Subscription* SubscriptionRegistry::find(const std::string& address) const {
  const auto it = entries_.find(address);
  return it == entries_.end() ? nullptr : &it->second;
}

void ParameterCatalog::add(const std::string& address, Provider provider) {
  if (!valid_address(address)) throw std::invalid_argument("invalid catalog address '" + address + "'");
  if (!providers_.emplace(address, std::move(provider)).second) {
    throw std::invalid_argument("duplicate catalog address '" + address + "'");
  }
}

std::vector<float> ParameterCatalog::value(const std::string& address) const {
  const auto it = providers_.find(address);
  if (it == providers_.end()) throw std::out_of_range("unknown parameter '" + address + "'");
  return it->second();
}

std::vector<std::string> ParameterCatalog::addresses() const {
  std::vector<std::string> out;
  for (const auto& [a, p] : providers_) out.push_back(a);
  return out;
}

ControlMessage error_reply(const std::string& request_address, const std::string& reason) {
  return {std::string(addr::kError), {request_address, reason}};
}

std::optional<ControlMessage> apply_request(SubscriptionRegistry& registry, const ParameterCatalog& catalog,
                                            const ControlMessage& msg) {
  if (!catalog.contains(msg.address)) return error_reply(msg.address, "unknown parameter");
  if (msg.args.size() != 1 || !std::holds_alternative<std::int32_t>(msg.args[0])) {
    return error_reply(msg.address, "expected one int32 interval in ms");
  }
  const auto interval = std::get<std::int32_t>(msg.args[0]);
  if (interval < 0) {
    registry.remove(msg.address);
  } else {
    registry.upsert(msg.address, interval);
  }
  return std::nullopt;
}

std::vector<ControlMessage> tick(SubscriptionRegistry& registry, const ParameterCatalog& catalog,
                                 std::int64_t now_ms) {
  std::vector<ControlMessage> out;
  for (auto& [address, sub] : registry) {
    const bool due = sub.interval_ms == 0 || !sub.last_sent_ms || now_ms - *sub.last_sent_ms >= sub.interval_ms;
    if (!due) continue;
    ControlMessage report{address, {}};
    for (float v : catalog.value(address)) report.args.emplace_back(v);
    out.push_back(std::move(report));
    if (!sub.last_sent_ms || now_ms - *sub.last_sent_ms >= 2 * std::int64_t{sub.interval_ms})
      sub.last_sent_ms = now_ms;
    else
      *sub.last_sent_ms += sub.interval_ms;
  }
  return out;
}

std::vector<ControlServer::Outgoing> ControlServer::handle(const std::string& endpoint, const ControlMessage& msg) {
  std::vector<Outgoing> out;
  auto reply = [&](ControlMessage m) { out.push_back({endpoint, std::move(m)}); };

  if (msg.address == addr::kConnect) {
    clients_.try_emplace(endpoint);
    reply({std::string(addr::kConnected), {}});
    return out;
  }
  if (msg.address == addr::kDisconnect) {
    if (clients_.erase(endpoint) == 0) spdlog::info("disconnect from unknown client {}", endpoint);
    return out;
  }
  const auto client = clients_.find(endpoint);
  if (client == clients_.end()) {
    reply(error_reply(msg.address, "not connected"));
    return out;
  }
  if (msg.address == addr::kMap) {
    if (map_) {
      reply({std::string(addr::kMap), {map_()}});
    } else {
      reply(error_reply(msg.address, "no map loaded"));
    }
    return out;
  }
  if (msg.address.starts_with(addr::kInput)) {
    if (input_) input_(msg);
    return out;
  }
  if (auto err = apply_request(client->second, *catalog_, msg)) reply(std::move(*err));
  return out;
}

std::vector<ControlServer::Outgoing> ControlServer::tick(std::int64_t now_ms) {
  std::vector<Outgoing> out;
  for (auto& [endpoint, registry] : clients_) {
    for (auto& m : resonant::tick(registry, *catalog_, now_ms)) out.push_back({endpoint, std::move(m)});
  }
  return out;
}

const SubscriptionRegistry* ControlServer::registry(const std::string& endpoint) const {
  const auto it = clients_.find(endpoint);
  return it == clients_.end() ? nullptr : &it->second;
}

}  // namespace resonant
