#include "swarmcast/crypto/key_exchange.hpp"

#include <algorithm>
#include <cstring>

#include "swarmcast/crypto/aes128.hpp"
#include "swarmcast/crypto/sha256.hpp"

namespace swarmcast::crypto {

namespace {

constexpr char kWrapLabel[] = "swarmcast-wrap-v1";  // without the NUL

bool equal_constant_time(const std::uint8_t* a, const std::uint8_t* b,
                         std::size_t len) {
  std::uint8_t acc = 0;
  for (std::size_t i = 0; i < len; ++i) {
    acc |= static_cast<std::uint8_t>(a[i] ^ b[i]);
  }
  return acc == 0;
}

std::array<std::uint8_t, 16> wrap_nonce(NodeId member) {
  std::array<std::uint8_t, 16> nonce{};
  nonce[0] = static_cast<std::uint8_t>(member >> 8);
  nonce[1] = static_cast<std::uint8_t>(member);
  return nonce;
}

std::array<std::uint8_t, 16> wrap_tag(const Key128& wrap_key, NodeId member,
                                      const std::array<std::uint8_t, 16>& wrapped) {
  std::array<std::uint8_t, 18> mac_input{};
  mac_input[0] = static_cast<std::uint8_t>(member >> 8);
  mac_input[1] = static_cast<std::uint8_t>(member);
  std::memcpy(mac_input.data() + 2, wrapped.data(), wrapped.size());
  const auto full = hmac_sha256(
      std::span<const std::uint8_t>(wrap_key.data(), wrap_key.size()),
      mac_input);
  std::array<std::uint8_t, 16> tag;
  std::memcpy(tag.data(), full.data(), tag.size());
  return tag;
}

}  // namespace

const char* to_string(ExchangePhase phase) {
  switch (phase) {
    case ExchangePhase::Idle:
      return "idle";
    case ExchangePhase::AwaitingPubkeys:
      return "awaiting-pubkeys";
    case ExchangePhase::AwaitingSessionKey:
      return "awaiting-session-key";
    case ExchangePhase::Established:
      return "established";
  }
  return "unknown";
}

const char* to_string(KeyxError error) {
  switch (error) {
    case KeyxError::None:
      return "none";
    case KeyxError::UnknownMember:
      return "unknown-member";
  }
  return "unknown";
}

Key128 derive_wrap_key(const Key256& pairwise_secret) {
  Sha256 hasher;
  hasher.update(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(kWrapLabel),
      sizeof(kWrapLabel) - 1));
  hasher.update(pairwise_secret);
  const auto digest = hasher.finish();
  Key128 key;
  std::memcpy(key.data(), digest.data(), key.size());
  return key;
}

KeyxBody wrap_session_key(const SessionKey& key, NodeId member,
                          const Key256& pairwise_secret) {
  const Key128 wk = derive_wrap_key(pairwise_secret);
  KeyxBody body;
  body.phase = KeyxPhase::Wrapped;
  body.member = member;
  body.wrapped = key.key;
  Aes128 cipher(wk);
  cipher.ctr_xcrypt(wrap_nonce(member), body.wrapped, body.wrapped);
  body.wrap_tag = wrap_tag(wk, member, body.wrapped);
  return body;
}

std::optional<SessionKey> unwrap_session_key(const KeyxBody& body,
                                             const Key256& pairwise_secret) {
  if (body.phase != KeyxPhase::Wrapped) {
    return std::nullopt;
  }
  const Key128 wk = derive_wrap_key(pairwise_secret);
  const auto expected = wrap_tag(wk, body.member, body.wrapped);
  if (!equal_constant_time(expected.data(), body.wrap_tag.data(),
                           expected.size())) {
    return std::nullopt;
  }
  SessionKey key;
  key.key = body.wrapped;
  Aes128 cipher(wk);
  cipher.ctr_xcrypt(wrap_nonce(body.member), key.key, key.key);
  return key;
}

KeyExchangeState::KeyExchangeState(NodeId self, std::vector<NodeId> roster,
                                   KeyPair keypair,
                                   std::uint64_t session_key_seed)
    : self_(self),
      roster_(std::move(roster)),
      keypair_(keypair),
      leader_(*std::min_element(roster_.begin(), roster_.end())),
      role_(self_ == leader_ ? KeyxRole::Leader : KeyxRole::Member),
      key_rng_(session_key_seed) {}

KeyxBody KeyExchangeState::own_pubkey_body() const {
  KeyxBody body;
  body.phase = KeyxPhase::Pubkey;
  body.pubkey = keypair_.public_key;
  return body;
}

std::vector<KeyxBody> KeyExchangeState::start() {
  known_pubkeys_[self_] = keypair_.public_key;
  if (role_ == KeyxRole::Leader) {
    if (roster_.size() == 1) {
      // Nobody to agree with: draw the key and be done.
      SessionKey key;
      key_rng_.fill(key.key.data(), key.key.size());
      session_key_ = key;
      phase_ = ExchangePhase::Established;
      return {};
    }
    phase_ = ExchangePhase::AwaitingPubkeys;
  } else {
    phase_ = known_pubkeys_.contains(leader_)
                 ? ExchangePhase::AwaitingSessionKey
                 : ExchangePhase::AwaitingPubkeys;
  }
  return {own_pubkey_body()};
}

std::vector<KeyxBody> KeyExchangeState::on_timeout() {
  if (phase_ == ExchangePhase::Idle || phase_ == ExchangePhase::Established) {
    return {};
  }
  return {own_pubkey_body()};
}

bool KeyExchangeState::record_pubkey(NodeId sender, const Key256& point) {
  const Key256 shared = x25519(keypair_.private_key, point);
  if (x25519_output_is_zero(shared)) {
    return false;  // low-order or garbage point: unusable, keep nothing
  }
  known_pubkeys_[sender] = point;
  pairwise_secrets_[sender] = shared;
  return true;
}

std::vector<KeyxBody> KeyExchangeState::complete_if_ready() {
  for (const NodeId member : roster_) {
    if (!known_pubkeys_.contains(member)) {
      return {};
    }
  }
  if (!session_key_) {
    SessionKey key;
    key_rng_.fill(key.key.data(), key.key.size());
    session_key_ = key;
  }
  phase_ = ExchangePhase::Established;
  std::vector<KeyxBody> out;
  for (const NodeId member : roster_) {
    if (member == self_) {
      continue;
    }
    out.push_back(
        wrap_session_key(*session_key_, member, pairwise_secrets_.at(member)));
  }
  return out;
}

void KeyExchangeState::try_unwrap_stashed() {
  if (!stashed_wrapped_ || !pairwise_secrets_.contains(leader_)) {
    return;
  }
  if (auto key =
          unwrap_session_key(*stashed_wrapped_, pairwise_secrets_.at(leader_))) {
    session_key_ = *key;
    phase_ = ExchangePhase::Established;
  }
  stashed_wrapped_.reset();
}

KeyExchangeState::HandleResult KeyExchangeState::on_frame(
    NodeId sender, const KeyxBody& body) {
  HandleResult result;
  if (body.phase == KeyxPhase::Pubkey) {
    if (sender == self_) {
      return result;  // own flooded announcement echoed back
    }
    if (std::find(roster_.begin(), roster_.end(), sender) == roster_.end()) {
      result.error = KeyxError::UnknownMember;
      return result;
    }
    if (!record_pubkey(sender, body.pubkey)) {
      return result;
    }
    if (role_ == KeyxRole::Leader) {
      if (phase_ == ExchangePhase::AwaitingPubkeys) {
        result.replies = complete_if_ready();
      } else if (phase_ == ExchangePhase::Established) {
        // A point from an already-served roster slot means that member is
        // still hungry (it lost the distribution, or never heard our
        // point). Serve it directly.
        result.replies.push_back(own_pubkey_body());
        result.replies.push_back(wrap_session_key(
            *session_key_, sender, pairwise_secrets_.at(sender)));
      }
    } else if (sender == leader_) {
      if (phase_ == ExchangePhase::AwaitingPubkeys) {
        phase_ = ExchangePhase::AwaitingSessionKey;
      }
      try_unwrap_stashed();
    }
    return result;
  }

  // Wrapped session key.
  if (role_ == KeyxRole::Leader || body.member != self_ || sender != leader_ ||
      phase_ == ExchangePhase::Established) {
    return result;  // someone else's copy, or nothing left to do
  }
  if (!pairwise_secrets_.contains(leader_)) {
    stashed_wrapped_ = body;  // cannot unwrap until the leader's point lands
    return result;
  }
  if (auto key = unwrap_session_key(body, pairwise_secrets_.at(leader_))) {
    session_key_ = *key;
    phase_ = ExchangePhase::Established;
  }
  return result;
}

}  // namespace swarmcast::crypto
