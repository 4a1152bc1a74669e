#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "swarmcast/crypto/envelope.hpp"
#include "swarmcast/crypto/x25519.hpp"
#include "swarmcast/rng.hpp"
#include "swarmcast/types.hpp"

namespace swarmcast::crypto {

enum class KeyxRole : std::uint8_t { Leader, Member };

enum class ExchangePhase : std::uint8_t {
  Idle,                // constructed, not yet started
  AwaitingPubkeys,     // leader: collecting points; member: needs the
                       // leader's point before it can unwrap anything
  AwaitingSessionKey,  // member: has the leader's point, waiting for its
                       // wrapped copy of the session key
  Established,         // session key in hand
};

enum class KeyxError : std::uint8_t {
  None = 0,
  UnknownMember,  // public point claimed by a node outside the roster
};

const char* to_string(ExchangePhase phase);
const char* to_string(KeyxError error);

/// Wrapping key for one leader-member pair: the 32-byte pairwise shared
/// secret hashed under a domain-separation label, truncated to 16 bytes.
Key128 derive_wrap_key(const Key256& pairwise_secret);

/// The session key encrypted for one member: XORed with an AES-128-CTR
/// keystream under the pairwise wrapping key (nonce = member id, zero
/// padded), authenticated by the first 16 bytes of HMAC-SHA-256 over
/// member id and wrapped bytes.
KeyxBody wrap_session_key(const SessionKey& key, NodeId member,
                          const Key256& pairwise_secret);

/// Tag-checked inverse of wrap_session_key; empty on any mismatch.
std::optional<SessionKey> unwrap_session_key(const KeyxBody& body,
                                             const Key256& pairwise_secret);

/// Group key agreement, hub style: every node broadcasts its public point;
/// the lowest-id node (the leader) collects the full roster's points, draws
/// the 128-bit session key, and broadcasts one wrapped copy per member;
/// members unwrap their copy. Loss is healed by retransmission: a
/// not-yet-established node re-broadcasts its point on every timeout, and
/// an established leader answers any late point with that member's wrapped
/// key (plus its own point, in case the member never heard it).
///
/// Purely event-driven; the engine owns the clock and the radio. Every
/// returned KeyxBody is for the engine to broadcast in its own frame.
class KeyExchangeState {
 public:
  /// `roster` must contain `self`; the leader is the lowest roster id.
  /// `session_key_seed` feeds the leader's key draw (unused by members).
  KeyExchangeState(NodeId self, std::vector<NodeId> roster, KeyPair keypair,
                   std::uint64_t session_key_seed);

  KeyxRole role() const { return role_; }
  ExchangePhase phase() const { return phase_; }
  bool established() const { return phase_ == ExchangePhase::Established; }
  NodeId leader() const { return leader_; }
  const std::optional<SessionKey>& session_key() const { return session_key_; }
  const std::map<NodeId, Key256>& known_pubkeys() const {
    return known_pubkeys_;
  }
  const KeyPair& keypair() const { return keypair_; }

  /// Begin the exchange: announce the own public point. A single-node
  /// roster establishes immediately with nothing to send.
  std::vector<KeyxBody> start();

  /// Phase deadline expired: re-broadcast the own phase message (the
  /// public point until established, nothing after).
  std::vector<KeyxBody> on_timeout();

  struct HandleResult {
    std::vector<KeyxBody> replies;
    KeyxError error = KeyxError::None;
  };

  /// One received KEYX body. `sender` is the frame's original sender (the
  /// point's owner for PUBKEY bodies; relays re-broadcast these frames
  /// verbatim, so the field survives multi-hop flooding).
  HandleResult on_frame(NodeId sender, const KeyxBody& body);

 private:
  KeyxBody own_pubkey_body() const;
  /// Records a validated point and its pairwise secret; false when the
  /// resulting secret is all zeros (low-order point) and nothing is kept.
  bool record_pubkey(NodeId sender, const Key256& point);
  /// Leader only: once every roster point is known, draw the key and
  /// produce every member's wrapped copy.
  std::vector<KeyxBody> complete_if_ready();
  void try_unwrap_stashed();

  NodeId self_;
  std::vector<NodeId> roster_;
  KeyPair keypair_;
  NodeId leader_;
  KeyxRole role_;
  ExchangePhase phase_ = ExchangePhase::Idle;
  std::map<NodeId, Key256> known_pubkeys_;
  std::map<NodeId, Key256> pairwise_secrets_;
  std::optional<SessionKey> session_key_;
  // A wrapped key that arrived before the leader's point did.
  std::optional<KeyxBody> stashed_wrapped_;
  DeterministicRng key_rng_;
};

}  // namespace swarmcast::crypto
