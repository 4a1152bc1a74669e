#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace swarmcast::crypto {

using Digest32 = std::array<std::uint8_t, 32>;

/// Incremental SHA-256 (FIPS 180-4).
class Sha256 {
 public:
  Sha256();
  void update(std::span<const std::uint8_t> data);
  Digest32 finish();

 private:
  void compress(const std::uint8_t block[64]);

  std::array<std::uint32_t, 8> state_;
  std::array<std::uint8_t, 64> buffer_;
  std::uint64_t total_bytes_ = 0;
  std::size_t buffered_ = 0;
};

Digest32 sha256(std::span<const std::uint8_t> data);

/// HMAC-SHA-256 (RFC 2104). Keys longer than the 64-byte block are hashed
/// first; shorter keys are zero-padded.
Digest32 hmac_sha256(std::span<const std::uint8_t> key,
                     std::span<const std::uint8_t> message);

}  // namespace swarmcast::crypto
