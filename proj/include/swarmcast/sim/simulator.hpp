#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <vector>

#include "swarmcast/engine.hpp"
#include "swarmcast/sim/metrics.hpp"
#include "swarmcast/sim/scenario.hpp"
#include "swarmcast/types.hpp"

namespace swarmcast::sim {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Position& a, const Position& b);

/// Discrete-event radio simulation at 1 ms resolution.
///
/// Each instant runs three phases in a fixed order: engine ticks
/// (ascending node id), telemetry sample injection (ascending node id),
/// then delivery of every frame transmitted during the previous instant,
/// in emission order. A broadcast reaches each node within the
/// transmitter's unit-disk range with probability (1 - loss_probability);
/// the survival draw is a counter-based stream keyed by
/// (seed, transmitter, transmission index, receiver), so a given copy's
/// fate never depends on event ordering, and raising the loss probability
/// can only remove receptions. Propagation takes exactly 1 ms. There is
/// no collision or capture model.
///
/// The optional adversary owns no key material and holds a fixed
/// position: eavesdrop records overheard frames, tamper re-broadcasts a
/// one-bit-flipped copy of each overheard data frame, replay re-broadcasts
/// recorded data frames verbatim after a configured delay.
class Simulator {
 public:
  using TickObserver = std::function<void(std::uint64_t now_ms)>;

  explicit Simulator(Scenario scenario);

  /// Execute the scenario once. `trace`, when given, receives one JSON
  /// line per transmission, delivery, rejection, and adversary action.
  /// `after_tick` runs at the end of every instant (for invariant probes).
  /// A Simulator is single-shot: a second call throws std::logic_error.
  MetricsReport run(std::ostream* trace = nullptr,
                    const TickObserver& after_tick = {});

  const Scenario& scenario() const { return scenario_; }
  const Engine& engine(NodeId id) const { return engines_.at(id); }
  Position node_position(NodeId id, std::uint64_t now_ms) const;

  /// Every frame the adversary overheard, in capture order.
  const std::vector<std::vector<std::uint8_t>>& adversary_log() const {
    return adversary_log_;
  }

  /// Plaintext of every message sealed during the run (for
  /// confidentiality scans and payload verification).
  std::vector<TelemetryPayload> originated_payloads() const;

 private:
  struct AirFrame {
    NodeId tx = kUnassignedNode;
    std::uint64_t tx_counter = 0;  // per-transmitter emission index
    std::uint64_t emitted_ms = 0;
    Position origin;
    double range_m = 0.0;
    std::vector<std::uint8_t> bytes;
  };

  void feed(NodeId id, const Event& event, std::uint64_t now_ms);
  void absorb(NodeId id, Output output, std::uint64_t now_ms);
  void transmit_honest(NodeId id, std::vector<std::uint8_t> bytes,
                       std::uint64_t now_ms);
  void inject_adversary_frame(std::vector<std::uint8_t> bytes,
                              std::uint64_t now_ms);
  void deliver(const AirFrame& frame, std::uint64_t now_ms);
  void adversary_overhear(const AirFrame& frame, std::uint64_t now_ms);
  void record_delivery(NodeId node, const Delivery& delivery,
                       std::uint64_t now_ms);
  bool sample_due(std::uint64_t now_ms) const;
  TelemetryPayload synth_payload(NodeId id, std::uint64_t now_ms) const;
  MetricsReport build_report() const;
  void trace_line(std::uint64_t now_ms, NodeId node, const char* kind,
                  const std::string& detail);
  void trace_rejections(NodeId node, const EngineCounters& before,
                        const EngineCounters& after, std::uint64_t now_ms);

  Scenario scenario_;
  std::map<NodeId, NodeSpec> specs_;
  std::map<NodeId, Engine> engines_;
  std::map<NodeId, std::uint64_t> tx_counters_;
  std::uint64_t adversary_counter_ = 0;
  bool ran_ = false;
  std::ostream* trace_ = nullptr;

  std::vector<AirFrame> in_flight_;  // transmitted this instant, lands next
  std::map<std::uint64_t, std::vector<std::vector<std::uint8_t>>>
      replay_schedule_;
  std::vector<std::vector<std::uint8_t>> adversary_log_;

  // Run accounting.
  std::map<NodeId, std::uint64_t> established_ms_;
  std::map<std::uint64_t, TelemetryPayload> truth_;  // (origin<<32|seq)
  std::map<std::tuple<NodeId, NodeId, std::uint32_t>, std::uint32_t>
      delivery_counts_;  // (node, origin, seq)
  std::vector<double> latency_hops_;
  std::vector<double> latency_ms_;
  std::uint64_t exactly_once_violations_ = 0;
  std::uint64_t corrupted_delivered_ = 0;
  std::uint64_t unknown_delivered_ = 0;
  std::uint64_t message_transmissions_ = 0;
  std::uint64_t data_frames_sent_ = 0;
  std::uint64_t control_frames_sent_ = 0;
  std::uint64_t adversary_overheard_ = 0;
  std::uint64_t adversary_injected_ = 0;
};

}  // namespace swarmcast::sim
