#include "swarmcast/forwarding.hpp"

#include <algorithm>

#include "swarmcast/wire_codec.hpp"

namespace swarmcast {

DedupCache::DedupCache(std::size_t capacity) : capacity_(capacity) {}

void DedupCache::touch(std::list<Entry>::iterator it) {
  order_.splice(order_.begin(), order_, it);
}

bool DedupCache::note_seen(NodeId origin, std::uint32_t origin_seq) {
  const std::uint64_t key = key_of(origin, origin_seq);
  const auto it = entries_.find(key);
  if (it != entries_.end()) {
    touch(it->second);
    ++duplicates_;
    return true;
  }
  order_.push_front(Entry{key, false});
  entries_[key] = order_.begin();
  if (entries_.size() > capacity_) {
    entries_.erase(order_.back().key);
    order_.pop_back();
  }
  return false;
}

bool DedupCache::seen(NodeId origin, std::uint32_t origin_seq) const {
  return entries_.contains(key_of(origin, origin_seq));
}

bool DedupCache::forwarded(NodeId origin, std::uint32_t origin_seq) const {
  const auto it = entries_.find(key_of(origin, origin_seq));
  return it != entries_.end() && it->second->forwarded;
}

void DedupCache::mark_forwarded(NodeId origin, std::uint32_t origin_seq) {
  const std::uint64_t key = key_of(origin, origin_seq);
  const auto it = entries_.find(key);
  if (it != entries_.end()) {
    it->second->forwarded = true;
    touch(it->second);
    return;
  }
  order_.push_front(Entry{key, true});
  entries_[key] = order_.begin();
  if (entries_.size() > capacity_) {
    entries_.erase(order_.back().key);
    order_.pop_back();
  }
}

bool OutQueue::enqueue(SealedMessage msg) {
  if (msg.ttl == 0) {
    return false;
  }
  for (const SealedMessage& queued : pending_) {
    if (queued.origin == msg.origin && queued.origin_seq == msg.origin_seq) {
      return false;
    }
  }
  pending_.push_back(std::move(msg));
  return true;
}

bool should_forward(const ForwardContext& ctx, const Router& router,
                    const DedupCache& dedup) {
  const bool local = ctx.received_from == kUnassignedNode;
  if (local) {
    // The origin transmits its own message exactly once, in every mode.
    return ctx.ttl > 0 && !dedup.forwarded(ctx.origin, ctx.origin_seq);
  }
  if (ctx.ttl < 2) {
    return false;  // the relayed copy would leave with ttl 0
  }
  if (dedup.forwarded(ctx.origin, ctx.origin_seq)) {
    return false;
  }
  switch (ctx.mode) {
    case ForwardingMode::NaiveFlood:
      return true;
    case ForwardingMode::PerSourceTrees: {
      const auto children = router.children_for_origin(ctx.origin, ctx.now_ms);
      for (const NodeId child : children) {
        if (child != ctx.received_from) {
          return true;
        }
      }
      return false;
    }
    case ForwardingMode::SpanningTree: {
      const SpanningTreeState tree =
          router.spanning_tree(ctx.tree_root, ctx.now_ms);
      if (tree.orphaned || tree.is_leaf()) {
        return false;
      }
      const bool from_parent =
          tree.parent.has_value() && *tree.parent == ctx.received_from;
      const bool from_child = tree.children.contains(ctx.received_from);
      return from_parent || from_child;
    }
  }
  return false;
}

std::vector<Frame> aggregate(NodeId self, OutQueue& queue,
                             std::vector<NextHopEntry> nht, std::size_t mtu,
                             std::uint32_t& next_frame_seq) {
  std::vector<Frame> frames;
  bool first = true;  // the table rides on the first frame actually emitted
  while (!queue.pending_.empty()) {
    Frame frame;
    frame.frame_type = FrameType::Data;
    frame.sender = self;
    std::size_t size = 10 + (first ? 5 * nht.size() : 0);

    while (!queue.pending_.empty()) {
      const SealedMessage& head = queue.pending_.front();
      const std::size_t msg_size = 32 + head.ciphertext.size();
      if (size + msg_size > mtu || frame.messages.size() == 255) {
        break;
      }
      frame.messages.push_back(std::move(queue.pending_.front()));
      queue.pending_.pop_front();
      size += msg_size;
    }

    if (frame.messages.empty()) {
      // Even alone this message cannot fit: drop it rather than stall the
      // whole queue behind it.
      queue.pending_.pop_front();
      ++queue.oversize_dropped_;
      continue;
    }
    if (first) {
      frame.next_hop_table = std::move(nht);
      first = false;
    }
    frame.frame_seq = next_frame_seq++;
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace swarmcast
