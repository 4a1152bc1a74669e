#pragma once

#include <cstdint>
#include <deque>
#include <list>
#include <unordered_map>
#include <vector>

#include "swarmcast/routing.hpp"
#include "swarmcast/types.hpp"

namespace swarmcast {

/// Bounded memory of recently seen (origin, origin_seq) message ids with a
/// per-id "already forwarded" flag. Least-recently-seen ids fall out when
/// the capacity is reached; a message is forwarded at most once while its
/// id remains cached.
class DedupCache {
 public:
  explicit DedupCache(std::size_t capacity = kDedupCapacity);

  /// Records an arrival. Returns true when the id had been seen before
  /// (a duplicate), incrementing the duplicate counter.
  bool note_seen(NodeId origin, std::uint32_t origin_seq);

  bool seen(NodeId origin, std::uint32_t origin_seq) const;
  bool forwarded(NodeId origin, std::uint32_t origin_seq) const;
  void mark_forwarded(NodeId origin, std::uint32_t origin_seq);

  std::uint64_t duplicate_count() const { return duplicates_; }
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    std::uint64_t key;
    bool forwarded = false;
  };
  static std::uint64_t key_of(NodeId origin, std::uint32_t origin_seq) {
    return (static_cast<std::uint64_t>(origin) << 32) | origin_seq;
  }
  void touch(std::list<Entry>::iterator it);

  std::size_t capacity_;
  std::uint64_t duplicates_ = 0;
  std::list<Entry> order_;  // most recently seen at the front
  std::unordered_map<std::uint64_t, std::list<Entry>::iterator> entries_;
};

/// FIFO of sealed messages awaiting aggregation into frames. Refuses
/// exhausted ttls and ids already pending.
class OutQueue {
 public:
  bool enqueue(SealedMessage msg);

  bool empty() const { return pending_.empty(); }
  std::size_t size() const { return pending_.size(); }
  const std::deque<SealedMessage>& pending() const { return pending_; }
  std::uint64_t oversize_dropped() const { return oversize_dropped_; }

 private:
  friend std::vector<Frame> aggregate(NodeId self, OutQueue& queue,
                                      std::vector<NextHopEntry> nht,
                                      std::size_t mtu,
                                      std::uint32_t& next_frame_seq);
  std::deque<SealedMessage> pending_;
  std::uint64_t oversize_dropped_ = 0;
};

/// Everything the per-mode relay decision needs to know about one
/// authenticated arrival. received_from is kUnassignedNode for messages
/// this node originated itself.
struct ForwardContext {
  NodeId self = kUnassignedNode;
  NodeId origin = kUnassignedNode;
  std::uint32_t origin_seq = 0;
  NodeId received_from = kUnassignedNode;
  std::uint8_t ttl = 0;  // as carried by the arriving copy
  ForwardingMode mode = ForwardingMode::PerSourceTrees;
  NodeId tree_root = kUnassignedNode;  // spanning-tree mode only
  std::uint64_t now_ms = 0;
};

/// Pure relay decision; marking the id as forwarded happens at enqueue
/// time, not here. A relayed copy is transmitted with ttl - 1, so relaying
/// needs ttl >= 2 to be worth anything; locally originated messages only
/// need ttl >= 1 and always go out exactly once.
bool should_forward(const ForwardContext& ctx, const Router& router,
                    const DedupCache& dedup);

/// Greedy FIFO packing of the whole queue into MTU-bounded frames. The
/// next-hop table rides on the first frame of the batch only; message
/// order is preserved; every emitted frame encodes to <= mtu bytes. A
/// message that cannot fit even alone in a fresh frame is dropped and
/// counted on the queue.
std::vector<Frame> aggregate(NodeId self, OutQueue& queue,
                             std::vector<NextHopEntry> nht, std::size_t mtu,
                             std::uint32_t& next_frame_seq);

}  // namespace swarmcast
