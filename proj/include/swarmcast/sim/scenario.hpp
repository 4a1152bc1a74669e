#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarmcast/types.hpp"

namespace swarmcast::sim {

/// Transmitter id used for adversary injections in the loss stream.
/// Never a valid swarm node id, so draws cannot collide with honest ones.
inline constexpr NodeId kAdversaryNode = 0xffff;

/// One timed position sample for waypoint mobility. Positions between
/// samples are linearly interpolated; before the first and after the last
/// the node holds still.
struct Waypoint {
  std::uint64_t time_ms = 0;
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Waypoint&) const = default;
};

struct NodeSpec {
  NodeId id = kUnassignedNode;
  double x = 0.0;
  double y = 0.0;
  std::vector<Waypoint> waypoints;  // only meaningful for waypoint mobility

  bool operator==(const NodeSpec&) const = default;
};

enum class MobilityModel : std::uint8_t { Static, Waypoint };

enum class AdversaryKind : std::uint8_t { Eavesdrop, Tamper, Replay };

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::Eavesdrop;
  double x = 0.0;
  double y = 0.0;
  double range_m = 0.0;
  std::uint64_t delay_ms = 0;  // replay only: time between capture and injection

  bool operator==(const AdversarySpec&) const = default;
};

/// Complete description of one simulation run. Everything that can affect
/// the outcome lives here; two runs of an identical scenario are
/// byte-identical.
struct Scenario {
  std::string name;
  std::vector<NodeSpec> nodes;
  double radio_range_m = 0.0;
  double loss_probability = 0.0;  // in [0, 1)
  MobilityModel mobility = MobilityModel::Static;
  std::uint64_t duration_ms = 0;
  ForwardingMode mode = ForwardingMode::PerSourceTrees;
  std::optional<AdversarySpec> adversary;
  std::uint64_t seed = 0;

  // Traffic and protocol timing. Defaults match the protocol constants;
  // scenario files may override any of them.
  std::uint64_t telemetry_start_ms = 1000;  // first sample time
  std::uint64_t drain_ms = 500;             // quiet tail after the last sample
  std::uint64_t ogm_interval_ms = kOgmIntervalMs;
  std::uint64_t telemetry_interval_ms = kTelemetryIntervalMs;
  std::uint64_t freshness_window_ms = kFreshnessWindowMs;
  std::uint64_t neighbor_timeout_ms = kNeighborTimeoutMs;
  std::uint64_t keyx_retry_ms = kKeyxRetryMs;
  std::size_t mtu_bytes = kMtuBytes;

  /// All node ids, ascending. This is the key-exchange roster.
  std::vector<NodeId> roster() const;
};

/// Parse failure that names the offending field, e.g.
/// "nodes[2].id: duplicate node id 5".
class InvalidScenario : public std::runtime_error {
 public:
  InvalidScenario(std::string field, const std::string& message);

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Parse and validate a scenario from JSON text. Throws InvalidScenario
/// on malformed JSON, unknown keys, missing fields, or out-of-range values.
Scenario parse_scenario(const std::string& json_text);

/// Read a scenario file from disk. Throws InvalidScenario (field "file")
/// if the file cannot be read, otherwise behaves like parse_scenario.
Scenario load_scenario(const std::string& path);

std::optional<ForwardingMode> parse_forwarding_mode(std::string_view name);
std::optional<AdversaryKind> parse_adversary_kind(std::string_view name);
const char* to_string(MobilityModel model);
const char* to_string(AdversaryKind kind);

}  // namespace swarmcast::sim
