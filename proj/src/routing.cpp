#include "swarmcast/routing.hpp"

#include <algorithm>

namespace swarmcast {

SpanningTreeState update_spanning_tree(
    NodeId self, NodeId root, std::span<const DepthAnnouncement> announcements,
    std::span<const NeighborView> neighbors) {
  SpanningTreeState state;
  state.root = root;

  for (const NeighborView& n : neighbors) {
    const auto it = n.their_next_hops.find(root);
    if (it != n.their_next_hops.end() && it->second == self) {
      state.children.insert(n.neighbor);
    }
  }

  if (self == root) {
    state.depth = 0;
    return state;
  }

  const DepthAnnouncement* best = nullptr;
  for (const DepthAnnouncement& a : announcements) {
    if (best == nullptr || a.depth < best->depth ||
        (a.depth == best->depth && a.neighbor < best->neighbor)) {
      best = &a;
    }
  }
  if (best == nullptr) {
    state.orphaned = true;
    return state;
  }
  state.parent = best->neighbor;
  state.depth = static_cast<std::uint8_t>(best->depth + 1);
  return state;
}

Router::Router(NodeId self, std::uint64_t neighbor_timeout_ms)
    : self_(self), neighbor_timeout_ms_(neighbor_timeout_ms) {}

OgmBody Router::emit_ogm() {
  ++ogm_seq_;  // wraps modulo 2^16; serial comparison keeps the order
  return OgmBody{self_, ogm_seq_, 0};
}

OgmDecision Router::process_ogm(NodeId from_neighbor, const OgmBody& ogm,
                                std::uint64_t now_ms) {
  OgmDecision decision;
  // Every announcement doubles as the sender's distance claim toward the
  // announcement's originator, feasible or not. The claims for the leader
  // feed the spanning-tree mode.
  depth_claims_[ogm.originator][from_neighbor] = HeardDepth{ogm.metric, now_ms};

  if (ogm.originator == self_) {
    return decision;  // our own announcement echoed back
  }
  if (ogm.metric == 255) {
    return decision;  // metric + 1 would overflow; cannot be a real route
  }
  const std::uint8_t new_metric = static_cast<std::uint8_t>(ogm.metric + 1);

  const auto it = routes_.find(ogm.originator);
  bool feasible = false;
  if (it == routes_.end()) {
    feasible = true;
  } else if (serial_newer(ogm.ogm_seq, it->second.ogm_seq)) {
    feasible = true;
  } else if (ogm.ogm_seq == it->second.ogm_seq &&
             new_metric < it->second.feasibility_distance) {
    feasible = true;
  }
  if (!feasible) {
    return decision;
  }

  RouteEntry& entry = routes_[ogm.originator];
  entry.destination = ogm.originator;
  entry.next_hop = from_neighbor;
  entry.metric = new_metric;
  entry.ogm_seq = ogm.ogm_seq;
  entry.feasibility_distance = new_metric;
  entry.last_updated_ms = now_ms;

  decision.accepted = true;
  if (new_metric < kMaxTtl) {
    decision.forward = true;
    decision.rebroadcast = OgmBody{ogm.originator, ogm.ogm_seq, new_metric};
  }
  return decision;
}

void Router::note_frame_heard(NodeId sender,
                              std::span<const NextHopEntry> their_table,
                              std::uint64_t now_ms) {
  if (sender == self_) {
    return;
  }
  NeighborView& view = neighbors_[sender];
  view.neighbor = sender;
  view.last_heard_ms = now_ms;
  for (const NextHopEntry& entry : their_table) {
    view.their_next_hops[entry.destination] = entry.next_hop;
  }
}

std::vector<NodeId> Router::children_for_origin(NodeId origin,
                                                std::uint64_t now_ms) const {
  std::vector<NodeId> children;
  for (const auto& [id, view] : neighbors_) {
    if (now_ms - view.last_heard_ms > neighbor_timeout_ms_) {
      continue;
    }
    const auto it = view.their_next_hops.find(origin);
    if (it != view.their_next_hops.end() && it->second == self_) {
      children.push_back(id);
    }
  }
  return children;
}

std::vector<NodeId> Router::live_neighbors(std::uint64_t now_ms) const {
  std::vector<NodeId> live;
  for (const auto& [id, view] : neighbors_) {
    if (now_ms - view.last_heard_ms <= neighbor_timeout_ms_) {
      live.push_back(id);
    }
  }
  return live;
}

bool Router::is_live_neighbor(NodeId node, std::uint64_t now_ms) const {
  const auto it = neighbors_.find(node);
  return it != neighbors_.end() &&
         now_ms - it->second.last_heard_ms <= neighbor_timeout_ms_;
}

std::optional<RouteEntry> Router::route_to(NodeId destination) const {
  const auto it = routes_.find(destination);
  if (it == routes_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::vector<NextHopEntry> Router::advertised_table(std::size_t max_entries) {
  std::vector<NextHopEntry> all;
  all.reserve(routes_.size());
  for (const auto& [dest, entry] : routes_) {
    all.push_back(NextHopEntry{dest, entry.next_hop, entry.metric});
  }
  if (all.size() <= max_entries) {
    advert_cursor_ = 0;
    return all;
  }
  std::vector<NextHopEntry> window;
  window.reserve(max_entries);
  for (std::size_t i = 0; i < max_entries; ++i) {
    window.push_back(all[(advert_cursor_ + i) % all.size()]);
  }
  advert_cursor_ = (advert_cursor_ + max_entries) % all.size();
  return window;
}

SpanningTreeState Router::spanning_tree(NodeId root,
                                        std::uint64_t now_ms) const {
  std::vector<DepthAnnouncement> announcements;
  if (const auto claims = depth_claims_.find(root);
      claims != depth_claims_.end()) {
    for (const auto& [id, heard] : claims->second) {
      if (now_ms - heard.heard_ms <= neighbor_timeout_ms_) {
        announcements.push_back(DepthAnnouncement{id, heard.depth});
      }
    }
  }
  std::vector<NeighborView> live;
  for (const auto& [id, view] : neighbors_) {
    if (now_ms - view.last_heard_ms <= neighbor_timeout_ms_) {
      live.push_back(view);
    }
  }
  return update_spanning_tree(self_, root, announcements, live);
}

}  // namespace swarmcast
