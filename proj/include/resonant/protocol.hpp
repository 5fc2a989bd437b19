#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace resonant {

using Arg = std::variant<std::int32_t, float, std::string>;

struct ControlMessage {
  std::string address;
  std::vector<Arg> args;

  friend bool operator==(const ControlMessage&, const ControlMessage&) = default;
};

namespace addr {
inline constexpr std::string_view kConnect = "/ViolinControl/Connect";
inline constexpr std::string_view kConnected = "/ViolinControl/Connected";
inline constexpr std::string_view kDisconnect = "/ViolinControl/Disconnect";
inline constexpr std::string_view kError = "/ViolinControl/Error";
inline constexpr std::string_view kMap = "/ViolinControl/Map";
inline constexpr std::string_view kParam = "/ViolinControl/Param/";
inline constexpr std::string_view kInput = "/ViolinControl/Input/";
// Active parameter vector; reported with one float per component.
inline constexpr std::string_view kVector = "/ViolinControl/Param/Vector";
}  // namespace addr

// Names of the twelve pose dimensions, violin sensor first. "Pitch2" is the
// violin's pitch angle; "Pitch" is the tracked fundamental.
const std::vector<std::string>& pose_names();
// The 15 canonical /ViolinControl/Param/ addresses.
std::vector<std::string> canonical_parameter_addresses();

class ProtocolError : public std::runtime_error {
 public:
  enum class Kind { Truncated, BadAddress, MissingTypeTag, BadPadding, UnsupportedType, BadJson };

  ProtocolError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

bool valid_address(std::string_view address);

// OSC 1.0 message encoding restricted to int32, float32 and string args.
std::vector<std::uint8_t> encode(const ControlMessage& msg);
ControlMessage decode(std::span<const std::uint8_t> bytes);

// {"address": "...", "args": [...]} used by the browser bridge. Integers
// map to int32, other numbers to float32, null to a NaN float.
std::string encode_json(const ControlMessage& msg);
ControlMessage decode_json(std::string_view text);

struct Subscription {
  std::string address;
  std::int32_t interval_ms = 0;  // 0 reports every tick
  // Advances by whole intervals, so periods off the tick grid keep their rate.
  std::optional<std::int64_t> last_sent_ms;
};

class SubscriptionRegistry {
 public:
  void upsert(const std::string& address, std::int32_t interval_ms);
  bool remove(const std::string& address);
  void clear() { entries_.clear(); }

  const Subscription* find(const std::string& address) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::map<std::string, Subscription> entries_;
};

// Address -> current value. Scalar parameters return one value.
class ParameterCatalog {
 public:
  using Provider = std::function<std::vector<float>()>;

  void add(const std::string& address, Provider provider);
  bool contains(const std::string& address) const { return providers_.count(address) != 0; }
  std::vector<float> value(const std::string& address) const;
  std::vector<std::string> addresses() const;

 private:
  std::map<std::string, Provider> providers_;
};

ControlMessage error_reply(const std::string& request_address, const std::string& reason);

// Applies a rate request `<param address> <int32 interval_ms>`: positive
// intervals report periodically, zero every tick, negative halts. Returns
// an error reply for unknown addresses or malformed arguments.
std::optional<ControlMessage> apply_request(SubscriptionRegistry& registry, const ParameterCatalog& catalog,
                                            const ControlMessage& msg);

// Reports for every subscription due at now_ms, on the subscribed address.
std::vector<ControlMessage> tick(SubscriptionRegistry& registry, const ParameterCatalog& catalog,
                                 std::int64_t now_ms);

// Per-client session layer. Endpoints are opaque strings naming where a
// reply goes (for example "udp:127.0.0.1:9000" or "json:3").
class ControlServer {
 public:
  struct Outgoing {
    std::string endpoint;
    ControlMessage message;
  };
  using InputHandler = std::function<void(const ControlMessage&)>;
  using MapProvider = std::function<std::string()>;

  explicit ControlServer(const ParameterCatalog& catalog) : catalog_(&catalog) {}

  void on_input(InputHandler handler) { input_ = std::move(handler); }
  void on_map_request(MapProvider provider) { map_ = std::move(provider); }

  std::vector<Outgoing> handle(const std::string& endpoint, const ControlMessage& msg);
  std::vector<Outgoing> tick(std::int64_t now_ms);

  bool connected(const std::string& endpoint) const { return clients_.count(endpoint) != 0; }
  const SubscriptionRegistry* registry(const std::string& endpoint) const;
  std::size_t client_count() const { return clients_.size(); }
  void drop(const std::string& endpoint) { clients_.erase(endpoint); }

 private:
  const ParameterCatalog* catalog_;
  std::map<std::string, SubscriptionRegistry> clients_;
  InputHandler input_;
  MapProvider map_;
};

}  // namespace resonant
