#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "swarmcast/crypto/aes128.hpp"
#include "swarmcast/types.hpp"

namespace swarmcast::crypto {

/// 128-bit swarm-wide session key established by the group key exchange.
struct SessionKey {
  Key128 key{};

  bool operator==(const SessionKey&) const = default;
};

enum class OpenError : std::uint8_t {
  None = 0,
  BadTag,    // authentication failure anywhere in the envelope
  Stale,     // timestamp outside the freshness window
  Replayed,  // (origin, origin_seq) already consumed
  NoKey,     // no session key established yet (used by the engine layer)
};

const char* to_string(OpenError err);

/// Per-origin acceptance bookkeeping: highest accepted sequence number plus
/// a 64-bit look-behind bitmask. Sequence numbers below the window are
/// treated as already consumed (conservative: dropped, never re-accepted).
class ReplayState {
 public:
  bool would_accept(NodeId origin, std::uint32_t origin_seq) const;
  void consume(NodeId origin, std::uint32_t origin_seq);

  /// Highest consumed sequence number per origin (diagnostic view).
  std::map<NodeId, std::uint32_t> highest_seen() const;

 private:
  struct Window {
    std::uint32_t highest = 0;
    std::uint64_t mask = 0;  // bit k => (highest - 1 - k) seen
  };
  std::unordered_map<NodeId, Window> windows_;
};

/// Authenticated encryption of one telemetry message:
/// ciphertext = AES-128-CTR(key, nonce = origin ‖ origin_seq ‖ timestamp_ms
/// ‖ 2 zero counter bytes); tag = first 16 bytes of HMAC-SHA-256(key,
/// origin ‖ origin_seq ‖ timestamp_ms ‖ ciphertext). Encrypt-then-MAC;
/// ttl deliberately outside the MAC so relays can decrement it in flight.
/// Throws std::length_error when plaintext exceeds 255 bytes.
SealedMessage seal_message(const SessionKey& key, NodeId origin,
                           std::uint32_t origin_seq, std::uint64_t timestamp_ms,
                           std::uint8_t ttl,
                           std::span<const std::uint8_t> plaintext);

struct OpenResult {
  std::vector<std::uint8_t> plaintext;
  OpenError error = OpenError::None;

  bool ok() const { return error == OpenError::None; }
};

/// Verification order: constant-time tag check, then freshness
/// (|now - timestamp| ≤ freshness_window_ms), then replay; only a message
/// passing all three is decrypted and its sequence number consumed.
OpenResult open_message(const SessionKey& key, const SealedMessage& msg,
                        ReplayState& replay, std::uint64_t now_ms,
                        std::uint64_t freshness_window_ms = kFreshnessWindowMs);

/// The envelope's MAC truncated to 16 bytes, exposed for transcript checks.
std::array<std::uint8_t, 16> message_tag(const SessionKey& key,
                                         const SealedMessage& msg);

}  // namespace swarmcast::crypto
