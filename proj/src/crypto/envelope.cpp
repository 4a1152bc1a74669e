#include "swarmcast/crypto/envelope.hpp"

#include <cstring>
#include <stdexcept>

#include "swarmcast/crypto/sha256.hpp"

namespace swarmcast::crypto {

namespace {

Block128 make_nonce(NodeId origin, std::uint32_t origin_seq,
                    std::uint64_t timestamp_ms) {
  Block128 nonce{};
  nonce[0] = static_cast<std::uint8_t>(origin >> 8);
  nonce[1] = static_cast<std::uint8_t>(origin);
  for (int i = 0; i < 4; ++i) {
    nonce[2 + i] = static_cast<std::uint8_t>(origin_seq >> (24 - 8 * i));
  }
  for (int i = 0; i < 8; ++i) {
    nonce[6 + i] = static_cast<std::uint8_t>(timestamp_ms >> (56 - 8 * i));
  }
  // nonce[14], nonce[15] stay zero: the in-message block counter.
  return nonce;
}

std::array<std::uint8_t, 16> compute_tag(
    const SessionKey& key, NodeId origin, std::uint32_t origin_seq,
    std::uint64_t timestamp_ms, std::span<const std::uint8_t> ciphertext) {
  std::vector<std::uint8_t> mac_input;
  mac_input.reserve(14 + ciphertext.size());
  mac_input.push_back(static_cast<std::uint8_t>(origin >> 8));
  mac_input.push_back(static_cast<std::uint8_t>(origin));
  for (int i = 0; i < 4; ++i) {
    mac_input.push_back(static_cast<std::uint8_t>(origin_seq >> (24 - 8 * i)));
  }
  for (int i = 0; i < 8; ++i) {
    mac_input.push_back(
        static_cast<std::uint8_t>(timestamp_ms >> (56 - 8 * i)));
  }
  mac_input.insert(mac_input.end(), ciphertext.begin(), ciphertext.end());

  const Digest32 full = hmac_sha256(key.key, mac_input);
  std::array<std::uint8_t, 16> tag;
  std::memcpy(tag.data(), full.data(), tag.size());
  return tag;
}

bool equal_constant_time(std::span<const std::uint8_t> a,
                         std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) {
    return false;
  }
  std::uint8_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc = static_cast<std::uint8_t>(acc | (a[i] ^ b[i]));
  }
  return acc == 0;
}

}  // namespace

const char* to_string(OpenError err) {
  switch (err) {
    case OpenError::None:
      return "none";
    case OpenError::BadTag:
      return "bad_tag";
    case OpenError::Stale:
      return "stale";
    case OpenError::Replayed:
      return "replayed";
    case OpenError::NoKey:
      return "no_key";
  }
  return "unknown";
}

bool ReplayState::would_accept(NodeId origin, std::uint32_t origin_seq) const {
  const auto it = windows_.find(origin);
  if (it == windows_.end()) {
    return true;
  }
  const Window& w = it->second;
  if (origin_seq > w.highest) {
    return true;
  }
  if (origin_seq == w.highest) {
    return false;
  }
  const std::uint32_t behind = w.highest - origin_seq;
  if (behind > 64) {
    return false;  // below the window: conservatively treated as seen
  }
  return (w.mask & (std::uint64_t(1) << (behind - 1))) == 0;
}

std::map<NodeId, std::uint32_t> ReplayState::highest_seen() const {
  std::map<NodeId, std::uint32_t> view;
  for (const auto& [origin, window] : windows_) {
    view[origin] = window.highest;
  }
  return view;
}

void ReplayState::consume(NodeId origin, std::uint32_t origin_seq) {
  auto [it, inserted] = windows_.try_emplace(origin);
  Window& w = it->second;
  if (inserted) {
    w.highest = origin_seq;
    w.mask = 0;
    return;
  }
  if (origin_seq > w.highest) {
    const std::uint32_t shift = origin_seq - w.highest;
    w.mask = shift >= 64 ? 0 : (w.mask << shift);
    if (shift <= 64) {
      w.mask |= std::uint64_t(1) << (shift - 1);  // the old highest
    }
    w.highest = origin_seq;
    return;
  }
  if (origin_seq == w.highest) {
    return;
  }
  const std::uint32_t behind = w.highest - origin_seq;
  if (behind <= 64) {
    w.mask |= std::uint64_t(1) << (behind - 1);
  }
}

SealedMessage seal_message(const SessionKey& key, NodeId origin,
                           std::uint32_t origin_seq, std::uint64_t timestamp_ms,
                           std::uint8_t ttl,
                           std::span<const std::uint8_t> plaintext) {
  if (plaintext.size() > 255) {
    throw std::length_error("plaintext exceeds 255 bytes");
  }
  SealedMessage msg;
  msg.origin = origin;
  msg.origin_seq = origin_seq;
  msg.timestamp_ms = timestamp_ms;
  msg.ttl = ttl;
  msg.ciphertext.resize(plaintext.size());

  const Aes128 aes(key.key);
  aes.ctr_xcrypt(make_nonce(origin, origin_seq, timestamp_ms), plaintext,
                 msg.ciphertext);
  msg.tag = compute_tag(key, origin, origin_seq, timestamp_ms, msg.ciphertext);
  return msg;
}

OpenResult open_message(const SessionKey& key, const SealedMessage& msg,
                        ReplayState& replay, std::uint64_t now_ms,
                        std::uint64_t freshness_window_ms) {
  OpenResult result;

  const auto expected =
      compute_tag(key, msg.origin, msg.origin_seq, msg.timestamp_ms,
                  msg.ciphertext);
  if (!equal_constant_time(expected, msg.tag)) {
    result.error = OpenError::BadTag;
    return result;
  }

  const std::uint64_t age = now_ms >= msg.timestamp_ms
                                ? now_ms - msg.timestamp_ms
                                : msg.timestamp_ms - now_ms;
  if (age > freshness_window_ms) {
    result.error = OpenError::Stale;
    return result;
  }

  if (!replay.would_accept(msg.origin, msg.origin_seq)) {
    result.error = OpenError::Replayed;
    return result;
  }

  result.plaintext.resize(msg.ciphertext.size());
  const Aes128 aes(key.key);
  aes.ctr_xcrypt(make_nonce(msg.origin, msg.origin_seq, msg.timestamp_ms),
                 msg.ciphertext, result.plaintext);
  replay.consume(msg.origin, msg.origin_seq);
  return result;
}

std::array<std::uint8_t, 16> message_tag(const SessionKey& key,
                                         const SealedMessage& msg) {
  return compute_tag(key, msg.origin, msg.origin_seq, msg.timestamp_ms,
                     msg.ciphertext);
}

}  // namespace swarmcast::crypto
