#include "swarmcast/sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace swarmcast::sim {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw InvalidScenario(field, message);
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key())) {
      fail(where.empty() ? item.key() : where + "." + item.key(),
           "unknown field");
    }
  }
}

const json& require(const json& obj, const std::string& where,
                    const std::string& key) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    fail(where.empty() ? key : where + "." + key, "missing required field");
  }
  return *it;
}

double number_field(const json& value, const std::string& field) {
  if (!value.is_number()) {
    fail(field, "expected a number");
  }
  const double v = value.get<double>();
  if (!std::isfinite(v)) {
    fail(field, "must be finite");
  }
  return v;
}

std::uint64_t uint_field(const json& value, const std::string& field) {
  if (!value.is_number_unsigned()) {
    fail(field, "expected a non-negative integer");
  }
  return value.get<std::uint64_t>();
}

std::string string_field(const json& value, const std::string& field) {
  if (!value.is_string()) {
    fail(field, "expected a string");
  }
  return value.get<std::string>();
}

Waypoint parse_waypoint(const json& value, const std::string& field) {
  if (!value.is_object()) {
    fail(field, "expected an object {time_ms, x, y}");
  }
  reject_unknown_keys(value, field, {"time_ms", "x", "y"});
  Waypoint wp;
  wp.time_ms = uint_field(require(value, field, "time_ms"), field + ".time_ms");
  wp.x = number_field(require(value, field, "x"), field + ".x");
  wp.y = number_field(require(value, field, "y"), field + ".y");
  return wp;
}

NodeSpec parse_node(const json& value, const std::string& field,
                    MobilityModel mobility) {
  if (!value.is_object()) {
    fail(field, "expected an object {id, x, y}");
  }
  reject_unknown_keys(value, field, {"id", "x", "y", "waypoints"});
  NodeSpec node;
  const std::uint64_t id = uint_field(require(value, field, "id"), field + ".id");
  if (id < 1 || id >= kAdversaryNode) {
    fail(field + ".id", "node id must be in [1, 65534]");
  }
  node.id = static_cast<NodeId>(id);
  node.x = number_field(require(value, field, "x"), field + ".x");
  node.y = number_field(require(value, field, "y"), field + ".y");
  if (const auto it = value.find("waypoints"); it != value.end()) {
    if (mobility != MobilityModel::Waypoint) {
      fail(field + ".waypoints", "waypoints require \"mobility\": \"waypoint\"");
    }
    if (!it->is_array() || it->empty()) {
      fail(field + ".waypoints", "expected a non-empty array");
    }
    std::size_t i = 0;
    for (const auto& wp_json : *it) {
      const std::string wp_field =
          field + ".waypoints[" + std::to_string(i) + "]";
      const Waypoint wp = parse_waypoint(wp_json, wp_field);
      if (!node.waypoints.empty() &&
          wp.time_ms <= node.waypoints.back().time_ms) {
        fail(wp_field + ".time_ms", "waypoint times must be strictly increasing");
      }
      node.waypoints.push_back(wp);
      ++i;
    }
  }
  return node;
}

AdversarySpec parse_adversary(const json& value) {
  const std::string where = "adversary";
  if (!value.is_object()) {
    fail(where, "expected an object {kind, x, y, range_m[, delay_ms]}");
  }
  reject_unknown_keys(value, where, {"kind", "x", "y", "range_m", "delay_ms"});
  AdversarySpec adv;
  const std::string kind =
      string_field(require(value, where, "kind"), where + ".kind");
  const auto parsed = parse_adversary_kind(kind);
  if (!parsed) {
    fail(where + ".kind",
         "unknown kind \"" + kind + "\" (expected eavesdrop, tamper, or replay)");
  }
  adv.kind = *parsed;
  adv.x = number_field(require(value, where, "x"), where + ".x");
  adv.y = number_field(require(value, where, "y"), where + ".y");
  adv.range_m =
      number_field(require(value, where, "range_m"), where + ".range_m");
  if (adv.range_m <= 0) {
    fail(where + ".range_m", "must be positive");
  }
  const auto delay = value.find("delay_ms");
  if (adv.kind == AdversaryKind::Replay) {
    if (delay == value.end()) {
      fail(where + ".delay_ms", "required for a replay adversary");
    }
    adv.delay_ms = uint_field(*delay, where + ".delay_ms");
    if (adv.delay_ms == 0) {
      fail(where + ".delay_ms", "must be at least 1");
    }
  } else if (delay != value.end()) {
    fail(where + ".delay_ms", "only valid for a replay adversary");
  }
  return adv;
}

}  // namespace

std::vector<NodeId> Scenario::roster() const {
  std::vector<NodeId> ids;
  ids.reserve(nodes.size());
  for (const NodeSpec& node : nodes) {
    ids.push_back(node.id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

InvalidScenario::InvalidScenario(std::string field, const std::string& message)
    : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

std::optional<ForwardingMode> parse_forwarding_mode(std::string_view name) {
  if (name == "per_source_trees") {
    return ForwardingMode::PerSourceTrees;
  }
  if (name == "spanning_tree") {
    return ForwardingMode::SpanningTree;
  }
  if (name == "naive_flood") {
    return ForwardingMode::NaiveFlood;
  }
  return std::nullopt;
}

std::optional<AdversaryKind> parse_adversary_kind(std::string_view name) {
  if (name == "eavesdrop") {
    return AdversaryKind::Eavesdrop;
  }
  if (name == "tamper") {
    return AdversaryKind::Tamper;
  }
  if (name == "replay") {
    return AdversaryKind::Replay;
  }
  return std::nullopt;
}

const char* to_string(MobilityModel model) {
  switch (model) {
    case MobilityModel::Static:
      return "static";
    case MobilityModel::Waypoint:
      return "waypoint";
  }
  return "unknown";
}

const char* to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::Eavesdrop:
      return "eavesdrop";
    case AdversaryKind::Tamper:
      return "tamper";
    case AdversaryKind::Replay:
      return "replay";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& json_text) {
  json root = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) {
    fail("json", "not valid JSON");
  }
  if (!root.is_object()) {
    fail("json", "top level must be an object");
  }
  reject_unknown_keys(
      root, "",
      {"name", "nodes", "radio_range_m", "loss_probability", "mobility",
       "duration_ms", "mode", "adversary", "seed", "telemetry_start_ms",
       "drain_ms", "ogm_interval_ms", "telemetry_interval_ms",
       "freshness_window_ms", "neighbor_timeout_ms", "keyx_retry_ms",
       "mtu_bytes"});

  Scenario sc;
  sc.name = string_field(require(root, "", "name"), "name");
  if (sc.name.empty()) {
    fail("name", "must not be empty");
  }

  if (const auto it = root.find("mobility"); it != root.end()) {
    const std::string model = string_field(*it, "mobility");
    if (model == "static") {
      sc.mobility = MobilityModel::Static;
    } else if (model == "waypoint") {
      sc.mobility = MobilityModel::Waypoint;
    } else {
      fail("mobility",
           "unknown model \"" + model + "\" (expected static or waypoint)");
    }
  }

  const json& nodes = require(root, "", "nodes");
  if (!nodes.is_array() || nodes.empty()) {
    fail("nodes", "expected a non-empty array");
  }
  std::set<NodeId> seen_ids;
  std::size_t i = 0;
  for (const auto& node_json : nodes) {
    const std::string field = "nodes[" + std::to_string(i) + "]";
    NodeSpec node = parse_node(node_json, field, sc.mobility);
    if (!seen_ids.insert(node.id).second) {
      fail(field + ".id", "duplicate node id " + std::to_string(node.id));
    }
    sc.nodes.push_back(std::move(node));
    ++i;
  }

  sc.radio_range_m =
      number_field(require(root, "", "radio_range_m"), "radio_range_m");
  if (sc.radio_range_m <= 0) {
    fail("radio_range_m", "must be positive");
  }

  sc.loss_probability =
      number_field(require(root, "", "loss_probability"), "loss_probability");
  if (sc.loss_probability < 0.0 || sc.loss_probability >= 1.0) {
    fail("loss_probability", "must be in [0, 1)");
  }

  sc.duration_ms = uint_field(require(root, "", "duration_ms"), "duration_ms");
  if (sc.duration_ms == 0) {
    fail("duration_ms", "must be at least 1");
  }

  const std::string mode = string_field(require(root, "", "mode"), "mode");
  const auto parsed_mode = parse_forwarding_mode(mode);
  if (!parsed_mode) {
    fail("mode", "unknown mode \"" + mode +
                     "\" (expected per_source_trees, spanning_tree, or "
                     "naive_flood)");
  }
  sc.mode = *parsed_mode;

  sc.seed = uint_field(require(root, "", "seed"), "seed");

  if (const auto it = root.find("adversary"); it != root.end()) {
    sc.adversary = parse_adversary(*it);
  }

  const auto override_uint = [&](const char* key, std::uint64_t& target,
                                 std::uint64_t minimum) {
    if (const auto it = root.find(key); it != root.end()) {
      target = uint_field(*it, key);
      if (target < minimum) {
        fail(key, "must be at least " + std::to_string(minimum));
      }
    }
  };
  override_uint("telemetry_start_ms", sc.telemetry_start_ms, 0);
  override_uint("drain_ms", sc.drain_ms, 0);
  override_uint("ogm_interval_ms", sc.ogm_interval_ms, 1);
  override_uint("telemetry_interval_ms", sc.telemetry_interval_ms, 1);
  override_uint("freshness_window_ms", sc.freshness_window_ms, 1);
  override_uint("neighbor_timeout_ms", sc.neighbor_timeout_ms, 1);
  override_uint("keyx_retry_ms", sc.keyx_retry_ms, 1);
  if (const auto it = root.find("mtu_bytes"); it != root.end()) {
    const std::uint64_t mtu = uint_field(*it, "mtu_bytes");
    // Smallest useful MTU: header plus one sealed telemetry message.
    if (mtu < 10 + 32 + kTelemetryPayloadSize) {
      fail("mtu_bytes", "too small to carry one telemetry message");
    }
    sc.mtu_bytes = static_cast<std::size_t>(mtu);
  }

  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail("file", "cannot open \"" + path + "\"");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

}  // namespace swarmcast::sim
