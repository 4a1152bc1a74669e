#include "swarmcast/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>

#include "swarmcast/rng.hpp"
#include "swarmcast/wire_codec.hpp"

namespace swarmcast::sim {
namespace {

// Domain separator for the adversary's tamper bit choice, so it can never
// collide with the loss stream over the same (tx, counter) key.
constexpr std::uint64_t kTamperSalt = 0x7a6d7065725f6269ULL;

std::uint64_t message_key(NodeId origin, std::uint32_t seq) {
  return (static_cast<std::uint64_t>(origin) << 32) | seq;
}

const char* frame_kind_name(FrameType type) {
  switch (type) {
    case FrameType::Data:
      return "data";
    case FrameType::Ogm:
      return "ogm";
    case FrameType::Keyx:
      return "keyx";
  }
  return "unknown";
}

}  // namespace

double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

Simulator::Simulator(Scenario scenario) : scenario_(std::move(scenario)) {
  const std::vector<NodeId> roster = scenario_.roster();
  for (const NodeSpec& spec : scenario_.nodes) {
    specs_.emplace(spec.id, spec);
  }
  for (const NodeId id : roster) {
    NodeConfig config;
    config.id = id;
    config.roster = roster;
    config.mode = scenario_.mode;
    config.ogm_interval_ms = scenario_.ogm_interval_ms;
    config.telemetry_interval_ms = scenario_.telemetry_interval_ms;
    config.freshness_window_ms = scenario_.freshness_window_ms;
    config.neighbor_timeout_ms = scenario_.neighbor_timeout_ms;
    config.keyx_retry_ms = scenario_.keyx_retry_ms;
    config.mtu_bytes = scenario_.mtu_bytes;
    // Independent per-node entropy, fully determined by the scenario seed.
    config.rng_seed = keyed_u64(scenario_.seed, 0x6e6f6465ULL, id, 0);
    engines_.emplace(id, Engine{config});
    tx_counters_.emplace(id, 0);
  }
}

std::vector<TelemetryPayload> Simulator::originated_payloads() const {
  std::vector<TelemetryPayload> out;
  out.reserve(truth_.size());
  for (const auto& [key, payload] : truth_) {
    (void)key;
    out.push_back(payload);
  }
  return out;
}

Position Simulator::node_position(NodeId id, std::uint64_t now_ms) const {
  const NodeSpec& spec = specs_.at(id);
  if (spec.waypoints.empty()) {
    return {spec.x, spec.y};
  }
  const Waypoint& first = spec.waypoints.front();
  if (now_ms <= first.time_ms) {
    return {first.x, first.y};
  }
  const Waypoint& last = spec.waypoints.back();
  if (now_ms >= last.time_ms) {
    return {last.x, last.y};
  }
  for (std::size_t i = 1; i < spec.waypoints.size(); ++i) {
    const Waypoint& b = spec.waypoints[i];
    if (now_ms > b.time_ms) {
      continue;
    }
    const Waypoint& a = spec.waypoints[i - 1];
    const double span = static_cast<double>(b.time_ms - a.time_ms);
    const double f = static_cast<double>(now_ms - a.time_ms) / span;
    return {a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f};
  }
  return {last.x, last.y};
}

bool Simulator::sample_due(std::uint64_t now_ms) const {
  if (scenario_.duration_ms <= scenario_.drain_ms) {
    return false;
  }
  const std::uint64_t cutoff = scenario_.duration_ms - scenario_.drain_ms;
  return now_ms >= scenario_.telemetry_start_ms && now_ms < cutoff &&
         (now_ms - scenario_.telemetry_start_ms) %
                 scenario_.telemetry_interval_ms ==
             0;
}

TelemetryPayload Simulator::synth_payload(NodeId id,
                                          std::uint64_t now_ms) const {
  const Position pos = node_position(id, now_ms);
  TelemetryPayload p;
  p.latitude = static_cast<std::int32_t>(std::llround(pos.y * 1000.0));
  p.longitude = static_cast<std::int32_t>(std::llround(pos.x * 1000.0));
  p.altitude_mm = 120000 + 37 * static_cast<std::int32_t>(id);
  p.velocity_x = static_cast<std::int16_t>((id * 7 + now_ms / 100) % 500);
  p.velocity_y = static_cast<std::int16_t>((id * 11 + now_ms / 200) % 500);
  p.velocity_z = 0;
  p.heading = static_cast<std::uint16_t>((id * 1000ULL + now_ms / 10) % 36000);
  p.battery = static_cast<std::uint8_t>(
      100 - std::min<std::uint64_t>(50, now_ms / 2000));
  return p;
}

MetricsReport Simulator::run(std::ostream* trace,
                             const TickObserver& after_tick) {
  if (ran_) {
    throw std::logic_error("Simulator::run may only be called once");
  }
  ran_ = true;
  trace_ = trace;

  for (std::uint64_t now = 0; now < scenario_.duration_ms; ++now) {
    std::vector<AirFrame> arriving = std::move(in_flight_);
    in_flight_.clear();
    // Same-instant arrivals are processed lowest transmitter first. With the
    // strict feasibility rule the first equal-metric advertisement heard
    // wins, so this ordering is what makes route tie-breaks deterministic:
    // the surviving next hop is the lowest-id neighbor on a shortest path.
    std::sort(arriving.begin(), arriving.end(),
              [](const AirFrame& a, const AirFrame& b) {
                return std::tie(a.tx, a.tx_counter) <
                       std::tie(b.tx, b.tx_counter);
              });

    // Adversary replays whose delay elapses now are transmitted now.
    if (const auto it = replay_schedule_.find(now);
        it != replay_schedule_.end()) {
      for (std::vector<std::uint8_t>& bytes : it->second) {
        inject_adversary_frame(std::move(bytes), now);
      }
      replay_schedule_.erase(it);
    }

    for (auto& [id, engine] : engines_) {
      (void)engine;
      feed(id, TickEvent{now}, now);
    }

    if (sample_due(now)) {
      for (auto& [id, engine] : engines_) {
        const std::uint64_t before = engine.counters().originated;
        const TelemetryPayload payload = synth_payload(id, now);
        feed(id, TelemetrySampleEvent{payload, now}, now);
        if (engine.counters().originated > before) {
          // The engine sealed it; sequence numbers are issued 1, 2, ...
          const auto seq =
              static_cast<std::uint32_t>(engine.counters().originated);
          truth_.emplace(message_key(id, seq), payload);
        }
      }
    }

    for (const AirFrame& frame : arriving) {
      deliver(frame, now);
    }

    for (auto& [id, engine] : engines_) {
      if (engine.established() && !established_ms_.contains(id)) {
        established_ms_.emplace(id, now);
      }
    }

    if (after_tick) {
      after_tick(now);
    }
  }

  trace_ = nullptr;
  return build_report();
}

void Simulator::feed(NodeId id, const Event& event, std::uint64_t now_ms) {
  Engine& engine = engines_.at(id);
  EngineCounters before;
  if (trace_ != nullptr) {
    before = engine.counters();
  }
  absorb(id, engine.handle_event(event), now_ms);
  if (trace_ != nullptr) {
    trace_rejections(id, before, engine.counters(), now_ms);
  }
}

void Simulator::absorb(NodeId id, Output output, std::uint64_t now_ms) {
  for (std::vector<std::uint8_t>& bytes : output.frames) {
    transmit_honest(id, std::move(bytes), now_ms);
  }
  for (const Delivery& delivery : output.deliveries) {
    record_delivery(id, delivery, now_ms);
  }
}

void Simulator::transmit_honest(NodeId id, std::vector<std::uint8_t> bytes,
                                std::uint64_t now_ms) {
  AirFrame frame;
  frame.tx = id;
  frame.tx_counter = tx_counters_.at(id)++;
  frame.emitted_ms = now_ms;
  frame.origin = node_position(id, now_ms);
  frame.range_m = scenario_.radio_range_m;
  frame.bytes = std::move(bytes);

  const DecodeResult decoded = decode_frame(frame.bytes);
  if (decoded.ok()) {
    if (decoded.frame->frame_type == FrameType::Data) {
      ++data_frames_sent_;
      message_transmissions_ += decoded.frame->messages.size();
    } else {
      ++control_frames_sent_;
    }
    if (trace_ != nullptr) {
      trace_line(now_ms, id, "tx",
                 std::string(frame_kind_name(decoded.frame->frame_type)) +
                     " frame_seq=" + std::to_string(decoded.frame->frame_seq) +
                     " msgs=" + std::to_string(decoded.frame->messages.size()) +
                     " bytes=" + std::to_string(frame.bytes.size()));
    }
  }
  in_flight_.push_back(std::move(frame));
}

void Simulator::inject_adversary_frame(std::vector<std::uint8_t> bytes,
                                       std::uint64_t now_ms) {
  const AdversarySpec& adv = *scenario_.adversary;
  AirFrame frame;
  frame.tx = kAdversaryNode;
  frame.tx_counter = adversary_counter_++;
  frame.emitted_ms = now_ms;
  frame.origin = {adv.x, adv.y};
  frame.range_m = adv.range_m;
  frame.bytes = std::move(bytes);
  ++adversary_injected_;
  if (trace_ != nullptr) {
    trace_line(now_ms, kAdversaryNode, "adversary_inject",
               "bytes=" + std::to_string(frame.bytes.size()));
  }
  in_flight_.push_back(std::move(frame));
}

void Simulator::deliver(const AirFrame& frame, std::uint64_t now_ms) {
  for (auto& [rx, engine] : engines_) {
    (void)engine;
    if (rx == frame.tx) {
      continue;
    }
    // Geometry is evaluated at the moment of transmission.
    if (distance(frame.origin, node_position(rx, frame.emitted_ms)) >
        frame.range_m) {
      continue;
    }
    // Survival draw: reception happens iff the draw clears the loss
    // probability, so raising the loss can only remove receptions.
    if (keyed_uniform(scenario_.seed, frame.tx, frame.tx_counter, rx) <
        scenario_.loss_probability) {
      continue;
    }
    feed(rx, FrameInEvent{frame.bytes, now_ms}, now_ms);
  }
  adversary_overhear(frame, now_ms);
}

void Simulator::adversary_overhear(const AirFrame& frame,
                                   std::uint64_t now_ms) {
  if (!scenario_.adversary || frame.tx == kAdversaryNode) {
    return;
  }
  const AdversarySpec& adv = *scenario_.adversary;
  if (distance(frame.origin, {adv.x, adv.y}) > frame.range_m) {
    return;
  }
  if (keyed_uniform(scenario_.seed, frame.tx, frame.tx_counter,
                    kAdversaryNode) < scenario_.loss_probability) {
    return;
  }
  ++adversary_overheard_;
  adversary_log_.push_back(frame.bytes);
  if (trace_ != nullptr) {
    trace_line(now_ms, kAdversaryNode, "adversary_capture",
               "bytes=" + std::to_string(frame.bytes.size()));
  }

  const bool is_data = frame.bytes.size() > 1 &&
                       frame.bytes[1] == static_cast<std::uint8_t>(
                                             FrameType::Data);
  switch (adv.kind) {
    case AdversaryKind::Eavesdrop:
      break;
    case AdversaryKind::Tamper: {
      if (!is_data) {
        break;
      }
      std::vector<std::uint8_t> copy = frame.bytes;
      const std::uint64_t bit =
          keyed_u64(scenario_.seed ^ kTamperSalt, frame.tx, frame.tx_counter,
                    0) %
          (copy.size() * 8);
      copy[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      inject_adversary_frame(std::move(copy), now_ms);
      break;
    }
    case AdversaryKind::Replay: {
      if (!is_data) {
        break;
      }
      replay_schedule_[now_ms + adv.delay_ms].push_back(frame.bytes);
      break;
    }
  }
}

void Simulator::record_delivery(NodeId node, const Delivery& delivery,
                                std::uint64_t now_ms) {
  const auto count_key =
      std::make_tuple(node, delivery.origin, delivery.origin_seq);
  const std::uint32_t count = ++delivery_counts_[count_key];
  if (count > 1) {
    ++exactly_once_violations_;
  }
  const auto it = truth_.find(message_key(delivery.origin, delivery.origin_seq));
  if (it == truth_.end()) {
    ++unknown_delivered_;
  } else if (!(it->second == delivery.payload)) {
    ++corrupted_delivered_;
  }
  latency_hops_.push_back(static_cast<double>(delivery.hops));
  latency_ms_.push_back(
      static_cast<double>(delivery.received_ms - delivery.sent_ms));
  if (trace_ != nullptr) {
    trace_line(now_ms, node, "deliver",
               "origin=" + std::to_string(delivery.origin) +
                   " seq=" + std::to_string(delivery.origin_seq) +
                   " hops=" + std::to_string(delivery.hops) + " latency_ms=" +
                   std::to_string(delivery.received_ms - delivery.sent_ms));
  }
}

void Simulator::trace_line(std::uint64_t now_ms, NodeId node, const char* kind,
                           const std::string& detail) {
  *trace_ << "{\"time_ms\":" << now_ms << ",\"node\":" << node
          << ",\"kind\":\"" << kind << "\",\"detail\":\"" << detail << "\"}\n";
}

void Simulator::trace_rejections(NodeId node, const EngineCounters& before,
                                 const EngineCounters& after,
                                 std::uint64_t now_ms) {
  const auto emit = [&](const char* reason, std::uint64_t was,
                        std::uint64_t is) {
    for (std::uint64_t i = was; i < is; ++i) {
      trace_line(now_ms, node, "reject", reason);
    }
  };
  emit("no_key", before.rejected_no_key, after.rejected_no_key);
  emit("bad_tag", before.rejected_bad_tag, after.rejected_bad_tag);
  emit("stale", before.rejected_stale, after.rejected_stale);
  emit("replayed", before.rejected_replayed, after.rejected_replayed);
  emit("payload", before.rejected_payload, after.rejected_payload);
  emit("malformed_frame", before.frames_malformed, after.frames_malformed);
}

MetricsReport Simulator::build_report() const {
  MetricsReport r;
  r.scenario_name = scenario_.name;
  r.mode = scenario_.mode;
  r.node_count = engines_.size();
  r.duration_ms = scenario_.duration_ms;

  bool all_established = true;
  std::uint64_t last_established = 0;
  for (const auto& [id, engine] : engines_) {
    NodeReport node;
    node.id = id;
    node.counters = engine.counters();
    const auto it = established_ms_.find(id);
    node.established = it != established_ms_.end();
    node.established_ms = node.established ? it->second : 0;
    if (node.established) {
      last_established = std::max(last_established, it->second);
    } else {
      all_established = false;
    }

    r.originated += node.counters.originated;
    r.delivered += node.counters.delivered;
    r.duplicates += node.counters.duplicates;
    r.own_echoes += node.counters.own_echoes;
    r.rejected_no_key += node.counters.rejected_no_key;
    r.rejected_bad_tag += node.counters.rejected_bad_tag;
    r.rejected_stale += node.counters.rejected_stale;
    r.rejected_replayed += node.counters.rejected_replayed;
    r.rejected_payload += node.counters.rejected_payload;
    r.malformed_frames += node.counters.frames_malformed;
    r.per_node.push_back(std::move(node));
  }

  r.expected_deliveries =
      r.originated * static_cast<std::uint64_t>(r.node_count - 1);
  r.delivery_ratio = r.expected_deliveries == 0
                         ? 1.0
                         : static_cast<double>(r.delivered) /
                               static_cast<double>(r.expected_deliveries);
  r.exactly_once_violations = exactly_once_violations_;

  r.message_transmissions = message_transmissions_;
  r.data_frames_sent = data_frames_sent_;
  r.control_frames_sent = control_frames_sent_;
  r.transmissions_per_originated_message =
      r.originated == 0 ? 0.0
                        : static_cast<double>(message_transmissions_) /
                              static_cast<double>(r.originated);

  r.latency.samples = latency_ms_.size();
  if (!latency_ms_.empty()) {
    const double n = static_cast<double>(latency_ms_.size());
    r.latency.mean_hops =
        std::accumulate(latency_hops_.begin(), latency_hops_.end(), 0.0) / n;
    r.latency.mean_ms =
        std::accumulate(latency_ms_.begin(), latency_ms_.end(), 0.0) / n;
    r.latency.p95_hops = percentile95(latency_hops_);
    r.latency.p95_ms = percentile95(latency_ms_);
  }

  r.key_exchange_complete = all_established;
  r.key_exchange_time_ms =
      all_established ? last_established : scenario_.duration_ms;

  if (scenario_.adversary) {
    AdversaryReport adv;
    adv.kind = scenario_.adversary->kind;
    adv.frames_overheard = adversary_overheard_;
    adv.frames_injected = adversary_injected_;
    adv.accepted =
        corrupted_delivered_ + unknown_delivered_ + exactly_once_violations_;
    r.adversary = adv;
  }

  return r;
}

}  // namespace swarmcast::sim
