#include <cstring>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "swarmcast/crypto/envelope.hpp"
#include "swarmcast/rng.hpp"

using namespace swarmcast;
using namespace swarmcast::crypto;

namespace {

SessionKey test_key(std::uint64_t seed) {
  DeterministicRng rng(seed);
  SessionKey key;
  rng.fill(key.key.data(), key.key.size());
  return key;
}

std::vector<std::uint8_t> random_plaintext(DeterministicRng& rng,
                                           std::size_t len) {
  std::vector<std::uint8_t> p(len);
  rng.fill(p.data(), p.size());
  return p;
}

}  // namespace

TEST_CASE("seal of a 21-byte payload keeps length and adds a 16-byte tag") {
  DeterministicRng rng(1);
  const auto plaintext = random_plaintext(rng, 21);
  const SealedMessage msg =
      seal_message(test_key(7), 3, 1, 5000, kMaxTtl, plaintext);
  CHECK(msg.ciphertext.size() == 21);
  CHECK(msg.tag.size() == 16);
  CHECK(msg.ciphertext != plaintext);  // counter mode actually ran
}

TEST_CASE("sealing identical inputs is bit-identical") {
  DeterministicRng rng(2);
  const auto plaintext = random_plaintext(rng, 21);
  const SessionKey key = test_key(7);
  const SealedMessage a = seal_message(key, 3, 9, 5000, 4, plaintext);
  const SealedMessage b = seal_message(key, 3, 9, 5000, 4, plaintext);
  CHECK(a == b);
}

TEST_CASE("round trip over random messages of every length") {
  DeterministicRng rng(3);
  const SessionKey key = test_key(11);
  ReplayState replay;
  std::uint32_t seq = 1;
  for (std::size_t len = 0; len <= 255; ++len) {
    const auto plaintext = random_plaintext(rng, len);
    const std::uint64_t ts = 1000 + seq;
    const SealedMessage msg = seal_message(key, 5, seq, ts, 3, plaintext);
    const OpenResult r = open_message(key, msg, replay, ts);
    REQUIRE(r.ok());
    CHECK(r.plaintext == plaintext);
    ++seq;
  }
}

TEST_CASE("plaintext above 255 bytes is refused") {
  std::vector<std::uint8_t> big(256, 0x41);
  CHECK_THROWS_AS(seal_message(test_key(1), 1, 1, 0, 1, big),
                  std::length_error);
}

TEST_CASE("any single bit flip in ciphertext or tag fails authentication") {
  DeterministicRng rng(4);
  const SessionKey key = test_key(13);
  const auto plaintext = random_plaintext(rng, 21);
  const SealedMessage msg = seal_message(key, 2, 1, 9000, 5, plaintext);

  const std::size_t ct_bits = msg.ciphertext.size() * 8;
  const std::size_t tag_bits = msg.tag.size() * 8;
  for (std::size_t bit = 0; bit < ct_bits + tag_bits; ++bit) {
    SealedMessage tampered = msg;
    if (bit < ct_bits) {
      tampered.ciphertext[bit / 8] ^= static_cast<std::uint8_t>(1 << (bit % 8));
    } else {
      const std::size_t b = bit - ct_bits;
      tampered.tag[b / 8] ^= static_cast<std::uint8_t>(1 << (b % 8));
    }
    ReplayState replay;
    const OpenResult r = open_message(key, tampered, replay, 9000);
    CAPTURE(bit);
    CHECK(r.error == OpenError::BadTag);
  }
}

TEST_CASE("tampering with the authenticated header fields fails") {
  DeterministicRng rng(5);
  const SessionKey key = test_key(17);
  const SealedMessage msg =
      seal_message(key, 2, 7, 9000, 5, random_plaintext(rng, 21));

  ReplayState replay;
  SealedMessage t = msg;
  t.origin = 3;
  CHECK(open_message(key, t, replay, 9000).error == OpenError::BadTag);

  t = msg;
  t.origin_seq = 8;
  CHECK(open_message(key, t, replay, 9000).error == OpenError::BadTag);

  t = msg;
  t.timestamp_ms = 9001;
  CHECK(open_message(key, t, replay, 9000).error == OpenError::BadTag);
}

TEST_CASE("a different key fails authentication") {
  DeterministicRng rng(6);
  const SealedMessage msg =
      seal_message(test_key(1), 2, 7, 9000, 5, random_plaintext(rng, 21));
  ReplayState replay;
  CHECK(open_message(test_key(2), msg, replay, 9000).error ==
        OpenError::BadTag);
}

TEST_CASE("ttl is outside the authenticated envelope") {
  DeterministicRng rng(7);
  const SessionKey key = test_key(19);
  const auto plaintext = random_plaintext(rng, 21);
  const SealedMessage msg = seal_message(key, 2, 7, 9000, 5, plaintext);

  for (std::uint8_t ttl = 0; ttl <= kMaxTtl; ++ttl) {
    SealedMessage relayed = msg;
    relayed.ttl = ttl;
    ReplayState replay;
    const OpenResult r = open_message(key, relayed, replay, 9000);
    REQUIRE(r.ok());
    CHECK(r.plaintext == plaintext);
  }
}

TEST_CASE("freshness window boundaries") {
  DeterministicRng rng(8);
  const SessionKey key = test_key(23);
  const auto plaintext = random_plaintext(rng, 21);
  const std::uint64_t ts = 10000;
  std::uint32_t seq = 1;

  auto open_at = [&](std::uint64_t now) {
    const SealedMessage msg = seal_message(key, 2, seq++, ts, 5, plaintext);
    ReplayState replay;
    return open_message(key, msg, replay, now).error;
  };

  CHECK(open_at(ts) == OpenError::None);
  CHECK(open_at(ts + kFreshnessWindowMs) == OpenError::None);
  CHECK(open_at(ts + kFreshnessWindowMs + 1) == OpenError::Stale);
  // Clock skew into the future is bounded the same way.
  CHECK(open_at(ts - kFreshnessWindowMs) == OpenError::None);
  CHECK(open_at(ts - kFreshnessWindowMs - 1) == OpenError::Stale);

  // The window is configurable.
  const SealedMessage msg = seal_message(key, 2, seq, ts, 5, plaintext);
  ReplayState replay;
  CHECK(open_message(key, msg, replay, ts + 600, 500).error ==
        OpenError::Stale);
}

TEST_CASE("redelivery of an accepted message is rejected") {
  DeterministicRng rng(9);
  const SessionKey key = test_key(29);
  const SealedMessage msg =
      seal_message(key, 2, 7, 9000, 5, random_plaintext(rng, 21));
  ReplayState replay;
  CHECK(open_message(key, msg, replay, 9000).ok());
  CHECK(open_message(key, msg, replay, 9000).error == OpenError::Replayed);
  CHECK(open_message(key, msg, replay, 9001).error == OpenError::Replayed);
}

TEST_CASE("out-of-order delivery within the window is accepted once each") {
  DeterministicRng rng(10);
  const SessionKey key = test_key(31);
  const auto plaintext = random_plaintext(rng, 21);
  ReplayState replay;

  auto sealed = [&](std::uint32_t seq) {
    return seal_message(key, 2, seq, 9000, 5, plaintext);
  };

  CHECK(open_message(key, sealed(10), replay, 9000).ok());
  CHECK(open_message(key, sealed(8), replay, 9000).ok());
  CHECK(open_message(key, sealed(9), replay, 9000).ok());
  CHECK(open_message(key, sealed(8), replay, 9000).error ==
        OpenError::Replayed);
  CHECK(open_message(key, sealed(10), replay, 9000).error ==
        OpenError::Replayed);
}

TEST_CASE("sequence numbers below the look-behind window are dropped") {
  DeterministicRng rng(11);
  const SessionKey key = test_key(37);
  const auto plaintext = random_plaintext(rng, 21);
  ReplayState replay;

  auto open_seq = [&](std::uint32_t seq) {
    return open_message(key, seal_message(key, 2, seq, 9000, 5, plaintext),
                        replay, 9000)
        .error;
  };

  CHECK(open_seq(100) == OpenError::None);
  CHECK(open_seq(100 - 64) == OpenError::None);  // oldest in-window seq
  CHECK(open_seq(100 - 65) == OpenError::Replayed);  // below window
}

TEST_CASE("a large forward jump clears the window correctly") {
  DeterministicRng rng(12);
  const SessionKey key = test_key(41);
  const auto plaintext = random_plaintext(rng, 21);
  ReplayState replay;

  auto open_seq = [&](std::uint32_t seq) {
    return open_message(key, seal_message(key, 2, seq, 9000, 5, plaintext),
                        replay, 9000)
        .error;
  };

  CHECK(open_seq(5) == OpenError::None);
  CHECK(open_seq(5000) == OpenError::None);
  CHECK(open_seq(5) == OpenError::Replayed);     // far below the new window
  CHECK(open_seq(4999) == OpenError::None);      // inside the new window
  CHECK(open_seq(4999) == OpenError::Replayed);
}

TEST_CASE("replay tracking is per origin") {
  DeterministicRng rng(13);
  const SessionKey key = test_key(43);
  const auto plaintext = random_plaintext(rng, 21);
  ReplayState replay;

  CHECK(open_message(key, seal_message(key, 2, 7, 9000, 5, plaintext), replay,
                     9000)
            .ok());
  // Same sequence number from a different origin is independent.
  CHECK(open_message(key, seal_message(key, 3, 7, 9000, 5, plaintext), replay,
                     9000)
            .ok());
}

TEST_CASE("verification order: bad tag outranks stale outranks replayed") {
  DeterministicRng rng(14);
  const SessionKey key = test_key(47);
  const auto plaintext = random_plaintext(rng, 21);
  ReplayState replay;

  const SealedMessage msg = seal_message(key, 2, 7, 9000, 5, plaintext);
  CHECK(open_message(key, msg, replay, 9000).ok());

  // Replayed AND stale AND tampered → BadTag wins.
  SealedMessage tampered = msg;
  tampered.ciphertext[0] ^= 1;
  CHECK(open_message(key, tampered, replay, 20000).error == OpenError::BadTag);

  // Replayed AND stale → Stale wins.
  CHECK(open_message(key, msg, replay, 20000).error == OpenError::Stale);

  // A stale message must not consume its sequence number: once fresh
  // again (different sighting), it is still Replayed-only-if-consumed.
  const SealedMessage unseen = seal_message(key, 2, 8, 50000, 5, plaintext);
  CHECK(open_message(key, unseen, replay, 9000).error == OpenError::Stale);
  CHECK(open_message(key, unseen, replay, 50000).ok());
}

TEST_CASE("random forged tags are never accepted") {
  DeterministicRng rng(15);
  const SessionKey key = test_key(53);
  const SealedMessage msg =
      seal_message(key, 2, 7, 9000, 5, random_plaintext(rng, 21));
  ReplayState replay;
  int accepted = 0;
  for (int i = 0; i < 20000; ++i) {
    SealedMessage forged = msg;
    rng.fill(forged.tag.data(), forged.tag.size());
    if (open_message(key, forged, replay, 9000).ok()) {
      ++accepted;
    }
  }
  CHECK(accepted == 0);
}
