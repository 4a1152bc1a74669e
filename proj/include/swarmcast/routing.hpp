#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "swarmcast/types.hpp"

namespace swarmcast {

/// Best known route toward one destination.
struct RouteEntry {
  NodeId destination = kUnassignedNode;
  NodeId next_hop = kUnassignedNode;
  std::uint8_t metric = 0;  // hop count, >= 1
  std::uint16_t ogm_seq = 0;
  // Loop avoidance: lowest metric ever accepted for this destination at the
  // current ogm_seq. An equal-seq advertisement is feasible only when its
  // metric + 1 is strictly below this.
  std::uint8_t feasibility_distance = 0;
  std::uint64_t last_updated_ms = 0;
};

/// What we know about one direct neighbor: when it last spoke and the
/// next-hop table it advertises (destination -> its chosen next hop).
struct NeighborView {
  NodeId neighbor = kUnassignedNode;
  std::map<NodeId, NodeId> their_next_hops;
  std::uint64_t last_heard_ms = 0;
};

/// A neighbor's claimed distance from the spanning-tree root, taken from
/// the metric field of its re-flooded root announcements.
struct DepthAnnouncement {
  NodeId neighbor = kUnassignedNode;
  std::uint8_t depth = 0;
};

struct SpanningTreeState {
  NodeId root = kUnassignedNode;
  std::optional<NodeId> parent;  // empty at the root and when orphaned
  std::uint8_t depth = 0;
  std::set<NodeId> children;
  bool orphaned = false;  // not the root, yet no live parent candidate

  bool is_leaf() const { return children.empty(); }
};

struct OgmDecision {
  bool accepted = false;
  bool forward = false;
  OgmBody rebroadcast;  // valid when forward is true; metric already +1
};

/// Pure spanning-tree derivation: parent is the live neighbor announcing
/// the minimum depth (ties to the lowest id); children are the neighbors
/// whose advertised next hop toward the root is self.
SpanningTreeState update_spanning_tree(
    NodeId self, NodeId root, std::span<const DepthAnnouncement> announcements,
    std::span<const NeighborView> neighbors);

/// Proactive routing state for one node: periodic originator announcements,
/// flooded-announcement processing with Babel-style feasibility, neighbor
/// liveness, and broadcast-tree membership by next-hop-table inversion.
class Router {
 public:
  explicit Router(NodeId self,
                  std::uint64_t neighbor_timeout_ms = kNeighborTimeoutMs);

  NodeId self() const { return self_; }

  /// Next periodic announcement: sequence number advances by 1 in
  /// serial-number arithmetic, metric starts at 0.
  OgmBody emit_ogm();

  /// Feasibility-gated route update. Returns whether the advertisement was
  /// accepted and whether it should be re-flooded (metric headroom left).
  OgmDecision process_ogm(NodeId from_neighbor, const OgmBody& ogm,
                          std::uint64_t now_ms);

  /// Record that any frame from `sender` was heard, refreshing liveness and
  /// merging any advertised next-hop entries into its view.
  void note_frame_heard(NodeId sender,
                        std::span<const NextHopEntry> their_table,
                        std::uint64_t now_ms);

  /// Live neighbors whose advertised next hop toward `origin` is this node:
  /// exactly the nodes that count on us to relay that origin's broadcasts.
  std::vector<NodeId> children_for_origin(NodeId origin,
                                          std::uint64_t now_ms) const;

  std::vector<NodeId> live_neighbors(std::uint64_t now_ms) const;
  bool is_live_neighbor(NodeId node, std::uint64_t now_ms) const;

  std::optional<RouteEntry> route_to(NodeId destination) const;
  const std::map<NodeId, RouteEntry>& routes() const { return routes_; }

  /// The table advertised on outgoing frames, sorted by destination. At
  /// most `max_entries` rows; a larger table rotates round-robin so every
  /// entry is advertised within ceil(n / max_entries) frames.
  std::vector<NextHopEntry> advertised_table(
      std::size_t max_entries = kMaxNhtEntriesPerFrame);

  /// Spanning-tree view derived from recorded depth announcements and
  /// neighbor tables. `self == root` yields depth 0 and no parent.
  SpanningTreeState spanning_tree(NodeId root, std::uint64_t now_ms) const;

  std::uint64_t neighbor_timeout_ms() const { return neighbor_timeout_ms_; }

 private:
  NodeId self_;
  std::uint64_t neighbor_timeout_ms_;
  std::uint16_t ogm_seq_ = 0;
  std::map<NodeId, RouteEntry> routes_;
  std::map<NodeId, NeighborView> neighbors_;
  struct HeardDepth {
    std::uint8_t depth = 0;
    std::uint64_t heard_ms = 0;
  };
  // originator -> neighbor -> that neighbor's last relayed metric for the
  // originator's announcement, i.e. the neighbor's claimed distance to it.
  std::map<NodeId, std::map<NodeId, HeardDepth>> depth_claims_;
  std::size_t advert_cursor_ = 0;
};

}  // namespace swarmcast
