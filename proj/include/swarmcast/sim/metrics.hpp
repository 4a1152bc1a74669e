#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swarmcast/engine.hpp"
#include "swarmcast/sim/scenario.hpp"
#include "swarmcast/types.hpp"

namespace swarmcast::sim {

/// What the adversary saw and achieved. `accepted` counts injected
/// material that any honest node actually delivered: corrupted payloads,
/// double deliveries of the same message id, or deliveries of ids no
/// honest node ever originated. A sound protocol keeps it at zero.
struct AdversaryReport {
  AdversaryKind kind = AdversaryKind::Eavesdrop;
  std::uint64_t frames_overheard = 0;
  std::uint64_t frames_injected = 0;
  std::uint64_t accepted = 0;

  bool operator==(const AdversaryReport&) const = default;
};

struct NodeReport {
  NodeId id = kUnassignedNode;
  bool established = false;
  std::uint64_t established_ms = 0;  // meaningful only when established
  EngineCounters counters;
};

/// Hop and wall-clock latency over all deliveries in the run. The p95 is
/// the value at index ceil(0.95 * n) - 1 of the ascending-sorted samples.
struct LatencyReport {
  std::uint64_t samples = 0;
  double mean_hops = 0.0;
  double p95_hops = 0.0;
  double mean_ms = 0.0;
  double p95_ms = 0.0;
};

/// Everything a run reports. Serialization is canonical: equal reports
/// produce byte-identical JSON, and a fixed (scenario, seed) pair always
/// produces an equal report.
struct MetricsReport {
  std::string scenario_name;
  ForwardingMode mode = ForwardingMode::PerSourceTrees;
  std::size_t node_count = 0;
  std::uint64_t duration_ms = 0;

  // Delivery: every originated message is expected at every other node.
  std::uint64_t originated = 0;
  std::uint64_t expected_deliveries = 0;  // originated * (node_count - 1)
  std::uint64_t delivered = 0;
  std::uint64_t exactly_once_violations = 0;
  double delivery_ratio = 1.0;  // 1.0 when nothing was expected

  // Efficiency: a frame carrying k messages counts as k message
  // transmissions, so aggregation does not hide relay cost.
  std::uint64_t message_transmissions = 0;
  std::uint64_t data_frames_sent = 0;
  std::uint64_t control_frames_sent = 0;
  double transmissions_per_originated_message = 0.0;

  LatencyReport latency;

  std::uint64_t duplicates = 0;
  std::uint64_t own_echoes = 0;
  std::uint64_t rejected_no_key = 0;
  std::uint64_t rejected_bad_tag = 0;
  std::uint64_t rejected_stale = 0;
  std::uint64_t rejected_replayed = 0;
  std::uint64_t rejected_payload = 0;
  std::uint64_t malformed_frames = 0;

  bool key_exchange_complete = false;
  std::uint64_t key_exchange_time_ms = 0;  // when the last node established

  std::optional<AdversaryReport> adversary;
  std::vector<NodeReport> per_node;  // ascending node id
};

/// Value at index ceil(0.95 * n) - 1 after sorting ascending; 0 if empty.
double percentile95(std::vector<double> values);

/// Canonical pretty-printed JSON (2-space indent, fixed key order).
std::string to_json_string(const MetricsReport& report);

/// One line for interactive use: mode, delivery ratio, transmissions per
/// message, p95 latency.
std::string one_line_summary(const MetricsReport& report);

}  // namespace swarmcast::sim
