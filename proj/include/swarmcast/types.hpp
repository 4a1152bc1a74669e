#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace swarmcast {

/// On-air addressing. 0 is reserved for "unassigned"; by convention the
/// ground control station is the lowest assigned id in a scenario.
using NodeId = std::uint16_t;

inline constexpr NodeId kUnassignedNode = 0;

inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kMtuBytes = 1400;
inline constexpr std::uint8_t kMaxTtl = 8;
inline constexpr std::uint64_t kOgmIntervalMs = 1000;
inline constexpr std::uint64_t kNeighborTimeoutMs = 3000;
inline constexpr std::uint64_t kTelemetryIntervalMs = 500;
inline constexpr std::uint64_t kFreshnessWindowMs = 2000;
inline constexpr std::uint64_t kKeyxRetryMs = 500;
inline constexpr std::size_t kDedupCapacity = 4096;
inline constexpr std::size_t kMaxNhtEntriesPerFrame = 64;

enum class FrameType : std::uint8_t {
  Data = 0,
  Ogm = 1,
  Keyx = 2,
};

enum class ForwardingMode : std::uint8_t {
  PerSourceTrees,
  SpanningTree,
  NaiveFlood,
};

const char* to_string(ForwardingMode mode);

/// Fixed 21-byte telemetry sample. Fields are encoded big-endian in
/// declaration order.
struct TelemetryPayload {
  std::int32_t latitude = 0;    // 1e-7 degree units
  std::int32_t longitude = 0;   // 1e-7 degree units
  std::int32_t altitude_mm = 0;
  std::int16_t velocity_x = 0;  // cm/s
  std::int16_t velocity_y = 0;
  std::int16_t velocity_z = 0;
  std::uint16_t heading = 0;    // centidegrees, < 36000
  std::uint8_t battery = 100;   // percent, <= 100

  bool operator==(const TelemetryPayload&) const = default;
};

inline constexpr std::size_t kTelemetryPayloadSize = 21;

/// Encrypted+authenticated telemetry unit. The tag binds origin, sequence,
/// timestamp and ciphertext; ttl is deliberately outside the authenticated
/// region so relays can decrement it in flight.
struct SealedMessage {
  NodeId origin = kUnassignedNode;
  std::uint32_t origin_seq = 0;
  std::uint64_t timestamp_ms = 0;
  std::uint8_t ttl = 0;
  std::vector<std::uint8_t> ciphertext;
  std::array<std::uint8_t, 16> tag{};

  bool operator==(const SealedMessage&) const = default;
};

struct NextHopEntry {
  NodeId destination = kUnassignedNode;
  NodeId next_hop = kUnassignedNode;
  std::uint8_t hop_count = 0;

  bool operator==(const NextHopEntry&) const = default;
};

/// Route discovery announcement. In spanning-tree mode only the root
/// originates these and metric doubles as tree depth.
struct OgmBody {
  NodeId originator = kUnassignedNode;
  std::uint16_t ogm_seq = 0;
  std::uint8_t metric = 0;

  bool operator==(const OgmBody&) const = default;
};

enum class KeyxPhase : std::uint8_t {
  Pubkey = 1,
  Wrapped = 2,
};

struct KeyxBody {
  KeyxPhase phase = KeyxPhase::Pubkey;
  std::array<std::uint8_t, 32> pubkey{};  // phase 1
  NodeId member = kUnassignedNode;        // phase 2
  std::array<std::uint8_t, 16> wrapped{};
  std::array<std::uint8_t, 16> wrap_tag{};

  bool operator==(const KeyxBody&) const = default;
};

/// The on-air unit. sender is the transmitting/relaying node, distinct
/// from the origins of the messages inside.
struct Frame {
  std::uint8_t version = kProtocolVersion;
  FrameType frame_type = FrameType::Data;
  NodeId sender = kUnassignedNode;
  std::uint32_t frame_seq = 0;
  std::vector<NextHopEntry> next_hop_table;
  std::vector<SealedMessage> messages;  // DATA
  std::optional<OgmBody> ogm;           // OGM
  std::optional<KeyxBody> keyx;         // KEYX

  bool operator==(const Frame& other) const;
};

/// True iff a is newer than b in RFC 1982 serial-number arithmetic
/// (16-bit space; the half-range rule keeps ordering across wraparound).
bool serial_newer(std::uint16_t a, std::uint16_t b);

}  // namespace swarmcast
