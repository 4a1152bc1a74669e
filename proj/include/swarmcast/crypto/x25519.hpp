#pragma once

#include <array>
#include <cstdint>

namespace swarmcast::crypto {

using Key256 = std::array<std::uint8_t, 32>;

/// X25519 Diffie-Hellman function (RFC 7748): scalar multiplication on
/// Curve25519 in Montgomery u-coordinates. The scalar is clamped as the
/// RFC requires; the point's top bit is masked.
Key256 x25519(const Key256& scalar, const Key256& u_point);

/// Scalar multiplication of the base point u = 9 (public key derivation).
Key256 x25519_base(const Key256& scalar);

/// An all-zero shared secret means the peer supplied a low-order point;
/// callers must reject the exchange.
bool x25519_output_is_zero(const Key256& output);

struct KeyPair {
  Key256 private_key{};
  Key256 public_key{};

  bool operator==(const KeyPair&) const = default;
};

/// Deterministic key derivation: the 32 seed bytes are the private scalar
/// (clamping makes every value usable), the public point is its base-point
/// multiple.
KeyPair generate_keypair(const Key256& seed);

}  // namespace swarmcast::crypto
