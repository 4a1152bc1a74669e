#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "swarmcast/crypto/envelope.hpp"
#include "swarmcast/crypto/key_exchange.hpp"
#include "swarmcast/forwarding.hpp"
#include "swarmcast/routing.hpp"
#include "swarmcast/types.hpp"

namespace swarmcast {

/// Static per-node configuration. The engine derives all of its entropy
/// (key pair, session key draw) from rng_seed, so two engines with equal
/// configs fed equal event sequences emit identical bytes.
struct NodeConfig {
  NodeId id = kUnassignedNode;
  std::vector<NodeId> roster;  // must contain id
  ForwardingMode mode = ForwardingMode::PerSourceTrees;
  std::uint64_t ogm_interval_ms = kOgmIntervalMs;
  std::uint64_t telemetry_interval_ms = kTelemetryIntervalMs;
  std::uint64_t freshness_window_ms = kFreshnessWindowMs;
  std::uint64_t neighbor_timeout_ms = kNeighborTimeoutMs;
  std::uint64_t keyx_retry_ms = kKeyxRetryMs;
  std::size_t mtu_bytes = kMtuBytes;
  std::uint64_t rng_seed = 0;
};

struct TickEvent {
  std::uint64_t now_ms = 0;
};

struct FrameInEvent {
  std::vector<std::uint8_t> raw;
  std::uint64_t now_ms = 0;
};

struct TelemetrySampleEvent {
  TelemetryPayload payload;
  std::uint64_t now_ms = 0;
};

using Event = std::variant<TickEvent, FrameInEvent, TelemetrySampleEvent>;

/// One telemetry message handed to the application.
struct Delivery {
  NodeId origin = kUnassignedNode;
  std::uint32_t origin_seq = 0;
  TelemetryPayload payload;
  std::uint64_t sent_ms = 0;      // origin's sealing timestamp
  std::uint64_t received_ms = 0;  // local arrival time
  std::uint8_t hops = 0;          // transmissions the copy traveled
};

struct Output {
  std::vector<std::vector<std::uint8_t>> frames;  // raw bytes to broadcast
  std::vector<Delivery> deliveries;
};

struct EngineCounters {
  // Frame-level ledger: every structurally valid incoming frame is exactly
  // one of the three types; malformed ones never reach them.
  std::uint64_t frames_received = 0;
  std::uint64_t frames_malformed = 0;
  std::uint64_t data_frames = 0;
  std::uint64_t ogm_frames = 0;
  std::uint64_t keyx_frames = 0;
  // Message-level ledger over sealed messages from other origins:
  // messages_received == delivered + rejected_no_key + rejected_bad_tag
  //                      + rejected_stale + rejected_replayed
  //                      + rejected_payload.
  std::uint64_t messages_received = 0;
  std::uint64_t delivered = 0;
  std::uint64_t rejected_no_key = 0;
  std::uint64_t rejected_bad_tag = 0;
  std::uint64_t rejected_stale = 0;
  std::uint64_t rejected_replayed = 0;
  std::uint64_t rejected_payload = 0;  // authentic but undecodable payload
  // Copies of this node's own messages echoed back by the flood.
  std::uint64_t own_echoes = 0;
  // Same-id arrivals observed before verification (flood fan-in measure).
  std::uint64_t duplicates = 0;
  std::uint64_t forwarded = 0;   // relay copies enqueued
  std::uint64_t originated = 0;  // own telemetry messages sealed
  std::uint64_t telemetry_dropped_no_key = 0;
  // Samples skipped because no live neighbor could hear the broadcast.
  std::uint64_t telemetry_suppressed_isolated = 0;
  std::uint64_t oversize_dropped = 0;
  std::uint64_t frames_sent = 0;
};

/// Read-only diagnostic view of one engine.
struct EngineSnapshot {
  NodeId id = kUnassignedNode;
  ForwardingMode mode = ForwardingMode::PerSourceTrees;
  crypto::ExchangePhase keyx_phase = crypto::ExchangePhase::Idle;
  std::map<NodeId, RouteEntry> routes;
  SpanningTreeState tree;  // rooted at the leader
  std::map<NodeId, std::uint32_t> replay_highest;
  EngineCounters counters;
};

/// Per-node protocol state machine: events in, frames and deliveries out.
/// Composes the key exchange, the security envelope, proactive routing,
/// and mode-specific forwarding. Performs no I/O and reads no clock; the
/// caller owns time.
///
/// Event handling:
///  - Tick: start or retry the key exchange, emit the periodic routing
///    announcement, flush any queued messages.
///  - TelemetrySample: seal under the session key (refused until the
///    exchange establishes) and broadcast.
///  - FrameIn: decode; KEYX bodies feed the exchange (frames also re-flood
///    verbatim, each once); OGM bodies feed the router and re-flood with
///    the incremented metric while feasible; DATA messages are verified,
///    delivered at most once each, and relayed per the forwarding mode
///    with the hop budget decremented. Tag-invalid messages are never
///    relayed.
class Engine {
 public:
  explicit Engine(NodeConfig config);

  Output handle_event(const Event& event);

  EngineSnapshot snapshot() const;

  const NodeConfig& config() const { return config_; }
  NodeId leader() const { return keyx_.leader(); }
  bool established() const { return keyx_.established(); }
  const crypto::KeyExchangeState& key_exchange() const { return keyx_; }
  const Router& router() const { return router_; }
  const DedupCache& dedup() const { return dedup_; }
  const EngineCounters& counters() const { return counters_; }

 private:
  void handle_tick(const TickEvent& tick, Output& out);
  void handle_telemetry(const TelemetrySampleEvent& sample, Output& out);
  void handle_frame(const FrameInEvent& in, Output& out);
  void handle_data(const Frame& frame, std::uint64_t now_ms, Output& out);
  void handle_ogm(const Frame& frame, std::uint64_t now_ms, Output& out);
  void handle_keyx(const Frame& frame, const std::vector<std::uint8_t>& raw,
                   std::uint64_t now_ms, Output& out);

  void emit_keyx_bodies(std::vector<KeyxBody> bodies, Output& out);
  void emit_ogm_frame(Output& out);
  void flush_queue(Output& out);
  void broadcast(Frame frame, Output& out);
  /// Advertised table bounded so a full-size sealed message still fits
  /// beside it within the MTU.
  std::vector<NextHopEntry> bounded_table();

  NodeConfig config_;
  crypto::KeyExchangeState keyx_;
  Router router_;
  DedupCache dedup_;
  DedupCache control_dedup_;  // (sender, frame_seq) of re-flooded KEYX
  OutQueue queue_;
  crypto::ReplayState replay_;
  EngineCounters counters_;
  std::uint32_t next_frame_seq_ = 0;
  std::uint32_t next_origin_seq_ = 1;
  std::uint64_t next_ogm_ms_ = 0;
  std::uint64_t next_keyx_retry_ms_ = 0;
  std::uint64_t last_event_ms_ = 0;
  bool keyx_started_ = false;
};

}  // namespace swarmcast
