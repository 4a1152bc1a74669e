#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "swarmcast/types.hpp"

namespace swarmcast {

/*
 * Wire layout (all integers big-endian, no varints):
 *
 *   header (10B): version 1B | frame_type 1B | sender 2B | frame_seq 4B |
 *                 nht_count 1B | msg_count 1B
 *   nht_count x NextHopEntry (5B): destination 2B | next_hop 2B | hop_count 1B
 *   body:
 *     DATA: msg_count x SealedMessage:
 *           origin 2B | origin_seq 4B | timestamp_ms 8B | ttl 1B |
 *           ct_len 1B | ciphertext ct_len B | tag 16B
 *     OGM:  originator 2B | ogm_seq 2B | metric 1B        (msg_count = 0)
 *     KEYX: phase 1B, then
 *           phase 1 (PUBKEY):  point 32B
 *           phase 2 (WRAPPED): member 2B | wrapped 16B | wrap_tag 16B
 *           (msg_count = 0, nht_count = 0)
 *
 * DATA size law: 10 + 5*|nht| + sum(32 + ct_len) per message.
 */

enum class EncodeError {
  SizeExceeded,
  InvariantViolation,
};

class CodecError : public std::runtime_error {
 public:
  CodecError(EncodeError kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  EncodeError kind() const { return kind_; }

 private:
  EncodeError kind_;
};

enum class DecodeError {
  None,
  Truncated,
  BadVersion,
  BadFrameType,
  CountMismatch,
};

const char* to_string(DecodeError err);

struct DecodeResult {
  std::optional<Frame> frame;
  DecodeError error = DecodeError::None;
  std::size_t offset = 0;  // first offending byte offset when error != None

  bool ok() const { return error == DecodeError::None; }
};

struct CodecLimits {
  std::size_t mtu_bytes = kMtuBytes;
};

/// Closed-form encoded size of a frame. Matches encode_frame byte for byte.
std::size_t encoded_size(const Frame& frame);

/// Throws CodecError on invariant violations or when the result would
/// exceed limits.mtu_bytes.
std::vector<std::uint8_t> encode_frame(const Frame& frame,
                                       const CodecLimits& limits = {});

/// Total parse of arbitrary bytes; never throws. Trailing garbage is
/// rejected with the offset of the first unconsumed byte.
DecodeResult decode_frame(std::span<const std::uint8_t> raw);

enum class PayloadError {
  None,
  RangeError,
  Truncated,
};

struct PayloadDecodeResult {
  std::optional<TelemetryPayload> payload;
  PayloadError error = PayloadError::None;

  bool ok() const { return error == PayloadError::None; }
};

/// Exactly 21 bytes, big-endian fields in declaration order.
/// Throws CodecError(InvariantViolation) when heading/battery are out of range.
std::array<std::uint8_t, kTelemetryPayloadSize> encode_payload(
    const TelemetryPayload& t);

PayloadDecodeResult decode_payload(std::span<const std::uint8_t> raw);

}  // namespace swarmcast
