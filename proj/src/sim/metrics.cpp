#include "swarmcast/sim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace swarmcast::sim {

double percentile95(std::vector<double> values) {
  if (values.empty()) {
    return 0.0;
  }
  std::sort(values.begin(), values.end());
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(values.size())));
  return values[rank - 1];
}

namespace {

nlohmann::ordered_json counters_json(const EngineCounters& c) {
  nlohmann::ordered_json j;
  j["frames_received"] = c.frames_received;
  j["frames_malformed"] = c.frames_malformed;
  j["data_frames"] = c.data_frames;
  j["ogm_frames"] = c.ogm_frames;
  j["keyx_frames"] = c.keyx_frames;
  j["messages_received"] = c.messages_received;
  j["delivered"] = c.delivered;
  j["rejected_no_key"] = c.rejected_no_key;
  j["rejected_bad_tag"] = c.rejected_bad_tag;
  j["rejected_stale"] = c.rejected_stale;
  j["rejected_replayed"] = c.rejected_replayed;
  j["rejected_payload"] = c.rejected_payload;
  j["own_echoes"] = c.own_echoes;
  j["duplicates"] = c.duplicates;
  j["forwarded"] = c.forwarded;
  j["originated"] = c.originated;
  j["telemetry_dropped_no_key"] = c.telemetry_dropped_no_key;
  j["telemetry_suppressed_isolated"] = c.telemetry_suppressed_isolated;
  j["oversize_dropped"] = c.oversize_dropped;
  j["frames_sent"] = c.frames_sent;
  return j;
}

}  // namespace

std::string to_json_string(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["scenario"] = report.scenario_name;
  j["mode"] = to_string(report.mode);
  j["node_count"] = report.node_count;
  j["duration_ms"] = report.duration_ms;

  nlohmann::ordered_json delivery;
  delivery["originated"] = report.originated;
  delivery["expected"] = report.expected_deliveries;
  delivery["delivered"] = report.delivered;
  delivery["ratio"] = report.delivery_ratio;
  delivery["exactly_once_violations"] = report.exactly_once_violations;
  j["delivery"] = delivery;

  nlohmann::ordered_json efficiency;
  efficiency["message_transmissions"] = report.message_transmissions;
  efficiency["transmissions_per_originated_message"] =
      report.transmissions_per_originated_message;
  efficiency["data_frames_sent"] = report.data_frames_sent;
  efficiency["control_frames_sent"] = report.control_frames_sent;
  j["efficiency"] = efficiency;

  nlohmann::ordered_json latency;
  latency["samples"] = report.latency.samples;
  latency["mean_hops"] = report.latency.mean_hops;
  latency["p95_hops"] = report.latency.p95_hops;
  latency["mean_ms"] = report.latency.mean_ms;
  latency["p95_ms"] = report.latency.p95_ms;
  j["latency"] = latency;

  nlohmann::ordered_json rejections;
  rejections["no_key"] = report.rejected_no_key;
  rejections["bad_tag"] = report.rejected_bad_tag;
  rejections["stale"] = report.rejected_stale;
  rejections["replayed"] = report.rejected_replayed;
  rejections["payload"] = report.rejected_payload;
  rejections["malformed_frames"] = report.malformed_frames;
  j["rejections"] = rejections;

  j["duplicates"] = report.duplicates;
  j["own_echoes"] = report.own_echoes;

  nlohmann::ordered_json keyx;
  keyx["complete"] = report.key_exchange_complete;
  keyx["time_ms"] = report.key_exchange_time_ms;
  j["key_exchange"] = keyx;

  if (report.adversary) {
    nlohmann::ordered_json adv;
    adv["kind"] = to_string(report.adversary->kind);
    adv["frames_overheard"] = report.adversary->frames_overheard;
    adv["frames_injected"] = report.adversary->frames_injected;
    adv["accepted"] = report.adversary->accepted;
    j["adversary"] = adv;
  } else {
    j["adversary"] = nullptr;
  }

  nlohmann::ordered_json per_node = nlohmann::ordered_json::array();
  for (const NodeReport& node : report.per_node) {
    nlohmann::ordered_json n;
    n["id"] = node.id;
    n["established"] = node.established;
    n["established_ms"] = node.established_ms;
    n["counters"] = counters_json(node.counters);
    per_node.push_back(n);
  }
  j["per_node"] = per_node;

  return j.dump(2) + "\n";
}

std::string one_line_summary(const MetricsReport& report) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "mode=%s delivery_ratio=%.3f tx_per_msg=%.2f p95_latency_ms=%.1f",
                to_string(report.mode), report.delivery_ratio,
                report.transmissions_per_originated_message,
                report.latency.p95_ms);
  return buf;
}

}  // namespace swarmcast::sim
