#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "kat/kat_vectors.hpp"
#include "swarmcast/crypto/aes128.hpp"
#include "swarmcast/crypto/sha256.hpp"
#include "swarmcast/crypto/x25519.hpp"
#include "swarmcast/rng.hpp"

using namespace swarmcast;
using namespace swarmcast::crypto;

namespace {

Key256 from_hex32(const std::string& hex) {
  Key256 out{};
  for (std::size_t i = 0; i < 32; ++i) {
    out[i] = static_cast<std::uint8_t>(
        std::stoi(hex.substr(2 * i, 2), nullptr, 16));
  }
  return out;
}

}  // namespace

TEST_CASE("sha256 matches known-answer vectors") {
  for (const auto& vec : kat::kSha256) {
    CHECK(sha256(vec.message) == vec.digest);
  }
}

TEST_CASE("sha256 streaming equals one-shot for every split") {
  const auto& msg = kat::kSha256.back().message;
  REQUIRE(msg.size() > 200);
  const Digest32 expected = sha256(msg);
  for (std::size_t split :
       {std::size_t{0}, std::size_t{1}, std::size_t{55}, std::size_t{56},
        std::size_t{63}, std::size_t{64}, std::size_t{65}, msg.size() - 1,
        msg.size()}) {
    Sha256 ctx;
    ctx.update({msg.data(), split});
    ctx.update({msg.data() + split, msg.size() - split});
    CHECK(ctx.finish() == expected);
  }
  // Byte-at-a-time.
  Sha256 ctx;
  for (std::uint8_t b : msg) {
    ctx.update({&b, 1});
  }
  CHECK(ctx.finish() == expected);
}

TEST_CASE("hmac-sha256 matches known-answer vectors") {
  for (const auto& vec : kat::kHmacSha256) {
    CHECK(hmac_sha256(vec.key, vec.message) == vec.mac);
  }
}

TEST_CASE("aes-128 block encryption matches known-answer vectors") {
  for (const auto& vec : kat::kAesBlock) {
    Aes128 aes(vec.key);
    CHECK(aes.encrypt_block(vec.plaintext) == vec.ciphertext);
  }
}

TEST_CASE("aes-128-ctr matches known-answer vectors at every length") {
  for (const auto& vec : kat::kAesCtr) {
    Aes128 aes(vec.key);
    std::vector<std::uint8_t> out(vec.plaintext.size());
    aes.ctr_xcrypt(vec.nonce, vec.plaintext, out);
    CHECK(out == vec.ciphertext);

    // Decryption is the same operation.
    std::vector<std::uint8_t> back(out.size());
    aes.ctr_xcrypt(vec.nonce, out, back);
    CHECK(back == vec.plaintext);
  }
}

TEST_CASE("aes-128-ctr works in place") {
  const auto& vec = kat::kAesCtr.back();
  Aes128 aes(vec.key);
  std::vector<std::uint8_t> buf = vec.plaintext;
  aes.ctr_xcrypt(vec.nonce, buf, buf);
  CHECK(buf == vec.ciphertext);
}

TEST_CASE("aes-128-ctr counter wraps across the low byte boundary") {
  // Start the counter at ...ff so the second block increments into the
  // next byte; cross-checked against the independent implementation via
  // the generated vectors, this guards the manual increment loop.
  Key128 key{};
  Block128 ctr{};
  ctr.fill(0xff);
  Aes128 aes(key);
  std::vector<std::uint8_t> zeros(48, 0);
  std::vector<std::uint8_t> out(48);
  aes.ctr_xcrypt(ctr, zeros, out);

  // Block 2 keystream must equal E(counter=0) since 0xff..ff + 1 wraps to 0.
  Block128 zero_block{};
  const Block128 expected = aes.encrypt_block(zero_block);
  CHECK(std::memcmp(out.data() + 16, expected.data(), 16) == 0);
}

TEST_CASE("x25519 matches known-answer vectors") {
  for (const auto& vec : kat::kX25519) {
    CHECK(x25519(vec.scalar, vec.point) == vec.output);
  }
}

TEST_CASE("x25519 base-point multiplication matches known-answer vectors") {
  for (const auto& vec : kat::kX25519Base) {
    CHECK(x25519_base(vec.scalar) == vec.output);
  }
  // The two fixed key pairs agree on the shared secret from both sides.
  const auto& a = kat::kX25519Base[0];
  const auto& b = kat::kX25519Base[1];
  CHECK(x25519(a.scalar, b.output) == kat::kX25519PairSecret);
  CHECK(x25519(b.scalar, a.output) == kat::kX25519PairSecret);
}

TEST_CASE("x25519 iterated ladder reaches the 1000-step vector") {
  Key256 k{};
  k[0] = 9;
  Key256 u = k;
  Key256 after_one = from_hex32(
      "422c8e7a6227d7bca1350b3e2bb7279f7897b87bb6854b783c60e80311ae3079");
  Key256 after_thousand = from_hex32(
      "684cf59ba83309552800ef566f2f4d3c1c3887c49360e3875f2eb94d99532c51");
  for (int i = 0; i < 1000; ++i) {
    const Key256 next = x25519(k, u);
    u = k;
    k = next;
    if (i == 0) {
      CHECK(k == after_one);
    }
  }
  CHECK(k == after_thousand);
}

TEST_CASE("x25519 shared secrets agree across 200 random pairs") {
  DeterministicRng rng(0x25519);
  for (int i = 0; i < 200; ++i) {
    Key256 a{};
    Key256 b{};
    rng.fill(a.data(), a.size());
    rng.fill(b.data(), b.size());
    const Key256 pub_a = x25519_base(a);
    const Key256 pub_b = x25519_base(b);
    const Key256 s_ab = x25519(a, pub_b);
    const Key256 s_ba = x25519(b, pub_a);
    CHECK(s_ab == s_ba);
    CHECK_FALSE(x25519_output_is_zero(s_ab));
  }
}

TEST_CASE("x25519 clamping makes raw and pre-clamped scalars equivalent") {
  DeterministicRng rng(0xc1a);
  for (int i = 0; i < 20; ++i) {
    Key256 raw{};
    rng.fill(raw.data(), raw.size());
    Key256 clamped = raw;
    clamped[0] &= 248;
    clamped[31] &= 127;
    clamped[31] |= 64;
    CHECK(x25519_base(raw) == x25519_base(clamped));
  }
}

TEST_CASE("x25519 low-order points give all-zero output") {
  DeterministicRng rng(0x10);
  Key256 scalar{};
  rng.fill(scalar.data(), scalar.size());

  Key256 zero_point{};
  CHECK(x25519_output_is_zero(x25519(scalar, zero_point)));

  Key256 one_point{};
  one_point[0] = 1;
  CHECK(x25519_output_is_zero(x25519(scalar, one_point)));
}
