#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "swarmcast/engine.hpp"
#include "swarmcast/wire_codec.hpp"

using namespace swarmcast;

namespace {

NodeConfig make_config(NodeId id, std::vector<NodeId> roster,
                       ForwardingMode mode = ForwardingMode::PerSourceTrees) {
  NodeConfig config;
  config.id = id;
  config.roster = std::move(roster);
  config.mode = mode;
  config.rng_seed = 0xc0ffee00ULL + id;
  return config;
}

TelemetryPayload make_payload(NodeId origin, std::uint32_t salt = 0) {
  TelemetryPayload p;
  p.latitude = 473000000 + static_cast<std::int32_t>(origin) * 1000 +
               static_cast<std::int32_t>(salt);
  p.longitude = -1220000000 + static_cast<std::int32_t>(salt) * 7;
  p.altitude_mm = 120000 + origin;
  p.velocity_x = static_cast<std::int16_t>(100 + origin);
  p.velocity_y = -25;
  p.velocity_z = 4;
  p.heading = static_cast<std::uint16_t>((origin * 1000 + salt) % 36000);
  p.battery = 88;
  return p;
}

/// A perfect in-memory broadcast medium over a fixed adjacency map:
/// frames emitted during millisecond t reach every linked node at t + 1.
/// Per millisecond, nodes tick in id order, then sample, then receive.
struct TestNet {
  std::map<NodeId, Engine> nodes;
  std::map<NodeId, std::set<NodeId>> links;
  // Frames in flight, in emission order: (sender, bytes).
  std::vector<std::pair<NodeId, std::vector<std::uint8_t>>> air;
  std::map<NodeId, std::vector<Delivery>> delivered;
  std::vector<std::pair<NodeId, std::vector<std::uint8_t>>> transcript;

  void add(const NodeConfig& config) { nodes.emplace(config.id, config); }

  void link(NodeId a, NodeId b) {
    links[a].insert(b);
    links[b].insert(a);
  }

  void collect(NodeId id, Output out) {
    for (auto& frame : out.frames) {
      transcript.emplace_back(id, frame);
      air.emplace_back(id, std::move(frame));
    }
    for (auto& delivery : out.deliveries) {
      delivered[id].push_back(delivery);
    }
  }

  void step(std::uint64_t now,
            const std::map<NodeId, TelemetryPayload>& samples = {}) {
    auto arriving = std::move(air);
    air.clear();
    for (auto& [id, engine] : nodes) {
      collect(id, engine.handle_event(TickEvent{now}));
    }
    for (const auto& [id, payload] : samples) {
      collect(id, nodes.at(id).handle_event(TelemetrySampleEvent{payload, now}));
    }
    for (const auto& [sender, bytes] : arriving) {
      for (auto& [id, engine] : nodes) {
        if (id == sender || !links[sender].contains(id)) {
          continue;
        }
        collect(id, engine.handle_event(FrameInEvent{bytes, now}));
      }
    }
  }

  void run(std::uint64_t from, std::uint64_t to) {
    for (std::uint64_t t = from; t <= to; ++t) {
      step(t);
    }
  }
};

FrameType type_of(const std::vector<std::uint8_t>& bytes) {
  const DecodeResult r = decode_frame(bytes);
  REQUIRE(r.ok());
  return r.frame->frame_type;
}

void check_sum_laws(const Engine& engine) {
  const EngineCounters& c = engine.counters();
  CHECK(c.frames_received == c.data_frames + c.ogm_frames + c.keyx_frames);
  CHECK(c.messages_received ==
        c.delivered + c.rejected_no_key + c.rejected_bad_tag +
            c.rejected_stale + c.rejected_replayed + c.rejected_payload);
}

}  // namespace

TEST_CASE("configuration is validated up front") {
  CHECK_THROWS_AS(Engine{make_config(5, {1, 2})}, std::invalid_argument);
  NodeConfig bad = make_config(1, {1, 2});
  bad.ogm_interval_ms = 0;
  CHECK_THROWS_AS(Engine{bad}, std::invalid_argument);
  CHECK_NOTHROW(Engine{make_config(1, {1, 2})});
}

TEST_CASE("before the key establishes, only control frames leave the node") {
  Engine node(make_config(2, {1, 2}));
  const Output out = node.handle_event(TickEvent{0});
  REQUIRE(out.frames.size() == 2);  // its public point and its announcement
  std::multiset<FrameType> types;
  for (const auto& bytes : out.frames) {
    types.insert(type_of(bytes));
  }
  CHECK(types.count(FrameType::Keyx) == 1);
  CHECK(types.count(FrameType::Ogm) == 1);
  CHECK_FALSE(node.established());

  const Output sampled =
      node.handle_event(TelemetrySampleEvent{make_payload(2), 0});
  CHECK(sampled.frames.empty());
  CHECK(node.counters().telemetry_dropped_no_key == 1);
  CHECK(node.counters().originated == 0);
}

TEST_CASE("two linked nodes establish with three distinct control frames") {
  TestNet net;
  net.add(make_config(1, {1, 2}));
  net.add(make_config(2, {1, 2}));
  net.link(1, 2);
  net.run(0, 4);

  CHECK(net.nodes.at(1).established());
  CHECK(net.nodes.at(2).established());

  // Count distinct control frames by (sender, frame_seq): relayed copies
  // of the same frame do not add new ones.
  std::set<std::pair<NodeId, std::uint32_t>> keyx_frames;
  int pubkeys = 0;
  int wrapped = 0;
  for (const auto& [sender, bytes] : net.transcript) {
    const DecodeResult r = decode_frame(bytes);
    REQUIRE(r.ok());
    if (r.frame->frame_type != FrameType::Keyx) {
      continue;
    }
    if (keyx_frames.emplace(r.frame->sender, r.frame->frame_seq).second) {
      if (r.frame->keyx->phase == KeyxPhase::Pubkey) {
        ++pubkeys;
      } else {
        ++wrapped;
      }
    }
  }
  // One point per node plus one wrapped copy from the leader.
  CHECK(pubkeys == 2);
  CHECK(wrapped == 1);
}

TEST_CASE("a sealed sample travels one hop and is delivered once") {
  TestNet net;
  net.add(make_config(1, {1, 2}));
  net.add(make_config(2, {1, 2}));
  net.link(1, 2);
  net.run(0, 4);
  REQUIRE(net.nodes.at(2).established());

  const TelemetryPayload payload = make_payload(1);
  net.step(5, {{1, payload}});
  net.step(6);
  net.step(7);

  REQUIRE(net.delivered[2].size() == 1);
  const Delivery& d = net.delivered[2][0];
  CHECK(d.origin == 1);
  CHECK(d.origin_seq == 1);
  CHECK(d.payload == payload);
  CHECK(d.sent_ms == 5);
  CHECK(d.received_ms == 6);
  CHECK(d.hops == 1);
  CHECK(net.delivered[1].empty());

  const EngineCounters& c1 = net.nodes.at(1).counters();
  const EngineCounters& c2 = net.nodes.at(2).counters();
  CHECK(c1.originated == 1);
  CHECK(c2.delivered == 1);
  CHECK(c2.messages_received == 1);
  check_sum_laws(net.nodes.at(1));
  check_sum_laws(net.nodes.at(2));
}

TEST_CASE("a three-node line relays exactly once and reports two hops") {
  TestNet net;
  const std::vector<NodeId> roster = {1, 2, 3};
  for (const NodeId id : roster) {
    net.add(make_config(id, roster));
  }
  net.link(1, 2);
  net.link(2, 3);
  net.run(0, 19);
  for (const NodeId id : roster) {
    REQUIRE(net.nodes.at(id).established());
  }

  const std::size_t frames_before = net.transcript.size();
  const TelemetryPayload payload = make_payload(1, 7);
  net.step(20, {{1, payload}});
  net.run(21, 24);

  REQUIRE(net.delivered[2].size() == 1);
  REQUIRE(net.delivered[3].size() == 1);
  CHECK(net.delivered[2][0].hops == 1);
  CHECK(net.delivered[3][0].hops == 2);
  CHECK(net.delivered[3][0].payload == payload);
  CHECK(net.delivered[3][0].received_ms == 22);  // one millisecond per hop

  // Origin transmission plus one relay by the middle node; the end node
  // has nobody downstream.
  int data_frames = 0;
  for (std::size_t i = frames_before; i < net.transcript.size(); ++i) {
    if (type_of(net.transcript[i].second) == FrameType::Data) {
      ++data_frames;
    }
  }
  CHECK(data_frames == 2);
  CHECK(net.nodes.at(2).counters().forwarded == 1);
  CHECK(net.nodes.at(3).counters().forwarded == 0);
  CHECK(net.nodes.at(1).counters().own_echoes == 1);
  for (const NodeId id : roster) {
    check_sum_laws(net.nodes.at(id));
  }
}

TEST_CASE("flooding a triangle delivers once each and flags the copies") {
  TestNet net;
  const std::vector<NodeId> roster = {1, 2, 3};
  for (const NodeId id : roster) {
    net.add(make_config(id, roster, ForwardingMode::NaiveFlood));
  }
  net.link(1, 2);
  net.link(1, 3);
  net.link(2, 3);
  net.run(0, 9);
  for (const NodeId id : roster) {
    REQUIRE(net.nodes.at(id).established());
  }

  const std::size_t frames_before = net.transcript.size();
  net.step(10, {{1, make_payload(1)}});
  net.run(11, 14);

  CHECK(net.delivered[2].size() == 1);
  CHECK(net.delivered[3].size() == 1);
  int data_frames = 0;
  for (std::size_t i = frames_before; i < net.transcript.size(); ++i) {
    if (type_of(net.transcript[i].second) == FrameType::Data) {
      ++data_frames;
    }
  }
  CHECK(data_frames == 3);  // the origin and one relay per peer

  const EngineCounters& c2 = net.nodes.at(2).counters();
  CHECK(c2.messages_received == 2);  // the original and the peer's relay
  CHECK(c2.delivered == 1);
  CHECK(c2.rejected_replayed == 1);
  CHECK(c2.duplicates == 1);
  CHECK(net.nodes.at(1).counters().own_echoes == 2);
  for (const NodeId id : roster) {
    check_sum_laws(net.nodes.at(id));
  }
}

TEST_CASE("identical configuration and schedule replay byte-identically") {
  auto run_once = [] {
    TestNet net;
    const std::vector<NodeId> roster = {1, 2, 3};
    for (const NodeId id : roster) {
      net.add(make_config(id, roster));
    }
    net.link(1, 2);
    net.link(2, 3);
    for (std::uint64_t t = 0; t <= 40; ++t) {
      std::map<NodeId, TelemetryPayload> samples;
      if (t >= 15 && t % 5 == 0) {
        for (const NodeId id : roster) {
          samples[id] = make_payload(id, static_cast<std::uint32_t>(t));
        }
      }
      net.step(t, samples);
    }
    return net.transcript;
  };
  const auto a = run_once();
  const auto b = run_once();
  REQUIRE(a.size() == b.size());
  CHECK(a == b);
}

TEST_CASE("a tampered copy is rejected and does not poison the original") {
  TestNet net;
  net.add(make_config(1, {1, 2}));
  net.add(make_config(2, {1, 2}));
  net.link(1, 2);
  net.run(0, 4);
  REQUIRE(net.nodes.at(2).established());

  // Capture a data frame without letting it reach node 2.
  Engine& origin = net.nodes.at(1);
  const Output out =
      origin.handle_event(TelemetrySampleEvent{make_payload(1), 5});
  REQUIRE(out.frames.size() == 1);
  const std::vector<std::uint8_t> clean = out.frames[0];
  REQUIRE(type_of(clean) == FrameType::Data);

  std::vector<std::uint8_t> tampered = clean;
  tampered[tampered.size() - 20] ^= 0x04;  // inside ciphertext or tag

  Engine& sink = net.nodes.at(2);
  const Output bad = sink.handle_event(FrameInEvent{tampered, 6});
  CHECK(bad.deliveries.empty());
  CHECK(bad.frames.empty());  // tag-invalid bytes are never relayed
  CHECK(sink.counters().rejected_bad_tag == 1);

  // The genuine copy still goes through afterwards.
  const Output good = sink.handle_event(FrameInEvent{clean, 6});
  REQUIRE(good.deliveries.size() == 1);
  CHECK(good.deliveries[0].payload == make_payload(1));
  CHECK(sink.counters().delivered == 1);
  CHECK(sink.counters().duplicates == 1);  // same id arrived twice
  check_sum_laws(sink);
}

TEST_CASE("replaying a delivered frame is rejected, late ones as stale") {
  TestNet net;
  net.add(make_config(1, {1, 2}));
  net.add(make_config(2, {1, 2}));
  net.link(1, 2);
  net.run(0, 4);

  Engine& origin = net.nodes.at(1);
  Engine& sink = net.nodes.at(2);
  const Output out =
      origin.handle_event(TelemetrySampleEvent{make_payload(1), 5});
  REQUIRE(out.frames.size() == 1);
  const std::vector<std::uint8_t> frame = out.frames[0];

  CHECK(sink.handle_event(FrameInEvent{frame, 6}).deliveries.size() == 1);
  // Immediate replay: fresh but already consumed.
  CHECK(sink.handle_event(FrameInEvent{frame, 7}).deliveries.empty());
  CHECK(sink.counters().rejected_replayed == 1);

  // A second sample captured now and replayed far outside the window.
  const Output late =
      origin.handle_event(TelemetrySampleEvent{make_payload(1, 1), 8});
  REQUIRE(late.frames.size() == 1);
  CHECK(sink.handle_event(FrameInEvent{late.frames[0], 5000})
            .deliveries.empty());
  CHECK(sink.counters().rejected_stale == 1);
  CHECK(sink.counters().delivered == 1);
  check_sum_laws(sink);
}

TEST_CASE("garbage bytes only tick a counter") {
  Engine node(make_config(1, {1, 2}));
  node.handle_event(TickEvent{0});
  const Output out = node.handle_event(
      FrameInEvent{{0xde, 0xad, 0xbe, 0xef, 0x00, 0x01, 0x02}, 1});
  CHECK(out.frames.empty());
  CHECK(out.deliveries.empty());
  CHECK(node.counters().frames_malformed == 1);
  CHECK(node.counters().frames_received == 0);
}

TEST_CASE("snapshots expose routes, tree shape, and replay progress") {
  TestNet net;
  const std::vector<NodeId> roster = {1, 2, 3};
  for (const NodeId id : roster) {
    net.add(make_config(id, roster));
  }
  net.link(1, 2);
  net.link(2, 3);

  CHECK(net.nodes.at(2).snapshot().routes.empty());
  CHECK(net.nodes.at(2).snapshot().keyx_phase == crypto::ExchangePhase::Idle);

  net.run(0, 19);
  net.step(20, {{1, make_payload(1)}});
  net.run(21, 24);

  const EngineSnapshot mid = net.nodes.at(2).snapshot();
  CHECK(mid.routes.size() == 2);  // one per other line member
  REQUIRE(mid.routes.contains(1));
  REQUIRE(mid.routes.contains(3));
  CHECK(mid.routes.at(1).metric == 1);
  CHECK(mid.routes.at(3).metric == 1);
  CHECK(mid.keyx_phase == crypto::ExchangePhase::Established);
  // Tree rooted at the leader (lowest id): the middle node hangs off the
  // root and carries the far end.
  CHECK(mid.tree.parent == std::optional<NodeId>{1});
  CHECK(mid.tree.children == std::set<NodeId>{3});

  const EngineSnapshot end = net.nodes.at(3).snapshot();
  CHECK(end.routes.size() == 2);
  CHECK(end.routes.at(1).metric == 2);
  CHECK(end.tree.is_leaf());
  REQUIRE(end.replay_highest.contains(1));
  CHECK(end.replay_highest.at(1) == 1);
}

TEST_CASE("telemetry plaintext never appears in any transmitted frame") {
  TestNet net;
  const std::vector<NodeId> roster = {1, 2, 3};
  for (const NodeId id : roster) {
    net.add(make_config(id, roster));
  }
  net.link(1, 2);
  net.link(2, 3);

  std::vector<std::array<std::uint8_t, kTelemetryPayloadSize>> plaintexts;
  for (std::uint64_t t = 0; t <= 60; ++t) {
    std::map<NodeId, TelemetryPayload> samples;
    if (t >= 15 && t % 10 == 0) {
      for (const NodeId id : roster) {
        const TelemetryPayload p = make_payload(id, static_cast<std::uint32_t>(t));
        samples[id] = p;
        plaintexts.push_back(encode_payload(p));
      }
    }
    net.step(t, samples);
  }
  REQUIRE(net.delivered[3].size() > 0);

  for (const auto& [sender, bytes] : net.transcript) {
    for (const auto& plain : plaintexts) {
      const bool found =
          std::search(bytes.begin(), bytes.end(), plain.begin(), plain.end()) !=
          bytes.end();
      CHECK_FALSE(found);
    }
  }
}

TEST_CASE("an established node with no live neighbors keeps telemetry local") {
  Engine lone{make_config(7, {7})};
  (void)lone.handle_event(TickEvent{0});
  REQUIRE(lone.established());

  const Output out =
      lone.handle_event(TelemetrySampleEvent{make_payload(7, 1), 5});
  CHECK(out.frames.empty());
  CHECK(lone.counters().originated == 0);
  CHECK(lone.counters().telemetry_dropped_no_key == 0);
  CHECK(lone.counters().telemetry_suppressed_isolated == 1);
}
