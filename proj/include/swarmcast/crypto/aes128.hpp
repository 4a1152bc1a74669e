#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace swarmcast::crypto {

using Key128 = std::array<std::uint8_t, 16>;
using Block128 = std::array<std::uint8_t, 16>;

/// AES-128, encryption direction only (FIPS 197). Counter mode needs no
/// inverse cipher, so none is provided.
class Aes128 {
 public:
  explicit Aes128(const Key128& key);

  Block128 encrypt_block(const Block128& in) const;

  /// Counter mode over the full 128-bit big-endian counter, starting at
  /// `counter0`. Encrypt and decrypt are the same operation. Works in place
  /// when out.data() == in.data().
  void ctr_xcrypt(const Block128& counter0, std::span<const std::uint8_t> in,
                  std::span<std::uint8_t> out) const;

 private:
  std::array<std::uint32_t, 44> round_keys_;
};

}  // namespace swarmcast::crypto
