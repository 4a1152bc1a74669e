#include "swarmcast/engine.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "swarmcast/rng.hpp"
#include "swarmcast/wire_codec.hpp"

namespace swarmcast {

namespace {

// Seed streams for the engine's two entropy consumers, derived from the
// single configured seed in a fixed order so replays are bit-identical.
struct DerivedSeeds {
  crypto::Key256 keypair_seed{};
  std::uint64_t session_key_seed = 0;
};

DerivedSeeds derive_seeds(std::uint64_t rng_seed) {
  DeterministicRng rng(rng_seed);
  DerivedSeeds seeds;
  rng.fill(seeds.keypair_seed.data(), seeds.keypair_seed.size());
  seeds.session_key_seed = rng.next_u64();
  return seeds;
}

NodeConfig validate(NodeConfig config) {
  if (config.roster.empty() ||
      std::find(config.roster.begin(), config.roster.end(), config.id) ==
          config.roster.end()) {
    throw std::invalid_argument("node id must be part of the roster");
  }
  if (config.ogm_interval_ms == 0 || config.telemetry_interval_ms == 0 ||
      config.neighbor_timeout_ms == 0 || config.keyx_retry_ms == 0) {
    throw std::invalid_argument("timer intervals must be positive");
  }
  return config;
}

}  // namespace

Engine::Engine(NodeConfig config)
    : config_(validate(std::move(config))),
      keyx_(config_.id, config_.roster,
            crypto::generate_keypair(derive_seeds(config_.rng_seed).keypair_seed),
            derive_seeds(config_.rng_seed).session_key_seed),
      router_(config_.id, config_.neighbor_timeout_ms) {}

Output Engine::handle_event(const Event& event) {
  Output out;
  std::visit(
      [&](const auto& ev) {
        using T = std::decay_t<decltype(ev)>;
        last_event_ms_ = ev.now_ms;
        if constexpr (std::is_same_v<T, TickEvent>) {
          handle_tick(ev, out);
        } else if constexpr (std::is_same_v<T, FrameInEvent>) {
          handle_frame(ev, out);
        } else {
          handle_telemetry(ev, out);
        }
      },
      event);
  return out;
}

void Engine::handle_tick(const TickEvent& tick, Output& out) {
  if (!keyx_started_) {
    keyx_started_ = true;
    emit_keyx_bodies(keyx_.start(), out);
    next_keyx_retry_ms_ = tick.now_ms + config_.keyx_retry_ms;
  } else if (!keyx_.established() && tick.now_ms >= next_keyx_retry_ms_) {
    emit_keyx_bodies(keyx_.on_timeout(), out);
    next_keyx_retry_ms_ = tick.now_ms + config_.keyx_retry_ms;
  }
  if (tick.now_ms >= next_ogm_ms_) {
    emit_ogm_frame(out);
    next_ogm_ms_ = tick.now_ms + config_.ogm_interval_ms;
  }
  flush_queue(out);
}

void Engine::handle_telemetry(const TelemetrySampleEvent& sample, Output& out) {
  if (!keyx_.established()) {
    ++counters_.telemetry_dropped_no_key;  // sealing refuses without a key
    return;
  }
  if (router_.live_neighbors(sample.now_ms).empty()) {
    ++counters_.telemetry_suppressed_isolated;  // nobody in range to hear it
    return;
  }
  const auto plaintext = encode_payload(sample.payload);
  const std::uint32_t seq = next_origin_seq_++;
  SealedMessage msg =
      crypto::seal_message(*keyx_.session_key(), config_.id, seq,
                           sample.now_ms, kMaxTtl, plaintext);
  ++counters_.originated;
  ForwardContext ctx;
  ctx.self = config_.id;
  ctx.origin = config_.id;
  ctx.origin_seq = seq;
  ctx.received_from = kUnassignedNode;
  ctx.ttl = msg.ttl;
  ctx.mode = config_.mode;
  ctx.tree_root = keyx_.leader();
  ctx.now_ms = sample.now_ms;
  if (should_forward(ctx, router_, dedup_) && queue_.enqueue(std::move(msg))) {
    dedup_.mark_forwarded(config_.id, seq);
  }
  flush_queue(out);
}

void Engine::handle_frame(const FrameInEvent& in, Output& out) {
  const DecodeResult decoded = decode_frame(in.raw);
  if (!decoded.ok()) {
    ++counters_.frames_malformed;
    return;
  }
  const Frame& frame = *decoded.frame;
  ++counters_.frames_received;
  if (frame.sender != config_.id) {
    router_.note_frame_heard(frame.sender, frame.next_hop_table, in.now_ms);
  }
  switch (frame.frame_type) {
    case FrameType::Data:
      ++counters_.data_frames;
      handle_data(frame, in.now_ms, out);
      break;
    case FrameType::Ogm:
      ++counters_.ogm_frames;
      handle_ogm(frame, in.now_ms, out);
      break;
    case FrameType::Keyx:
      ++counters_.keyx_frames;
      handle_keyx(frame, in.raw, in.now_ms, out);
      break;
  }
}

void Engine::handle_data(const Frame& frame, std::uint64_t now_ms,
                         Output& out) {
  for (const SealedMessage& msg : frame.messages) {
    if (msg.origin == config_.id) {
      ++counters_.own_echoes;  // the flood bounced our own message back
      continue;
    }
    ++counters_.messages_received;
    if (dedup_.note_seen(msg.origin, msg.origin_seq)) {
      ++counters_.duplicates;
    }
    if (!keyx_.established()) {
      ++counters_.rejected_no_key;  // cannot verify: neither deliver nor relay
      continue;
    }
    const crypto::OpenResult opened =
        crypto::open_message(*keyx_.session_key(), msg, replay_, now_ms,
                             config_.freshness_window_ms);
    switch (opened.error) {
      case crypto::OpenError::NoKey:
        ++counters_.rejected_no_key;  // unreachable: established was checked
        continue;
      case crypto::OpenError::BadTag:
        ++counters_.rejected_bad_tag;
        continue;  // unauthenticated bytes travel no further
      case crypto::OpenError::Stale:
        ++counters_.rejected_stale;
        continue;  // expired for every downstream node too
      case crypto::OpenError::Replayed:
        ++counters_.rejected_replayed;
        break;  // an authentic copy already delivered; relay rules decide
      case crypto::OpenError::None: {
        const PayloadDecodeResult payload = decode_payload(opened.plaintext);
        if (!payload.ok()) {
          ++counters_.rejected_payload;
          continue;
        }
        ++counters_.delivered;
        Delivery delivery;
        delivery.origin = msg.origin;
        delivery.origin_seq = msg.origin_seq;
        delivery.payload = *payload.payload;
        delivery.sent_ms = msg.timestamp_ms;
        delivery.received_ms = now_ms;
        delivery.hops = msg.ttl >= kMaxTtl
                            ? 1
                            : static_cast<std::uint8_t>(kMaxTtl - msg.ttl + 1);
        out.deliveries.push_back(delivery);
        break;
      }
    }
    ForwardContext ctx;
    ctx.self = config_.id;
    ctx.origin = msg.origin;
    ctx.origin_seq = msg.origin_seq;
    ctx.received_from = frame.sender;
    ctx.ttl = msg.ttl;
    ctx.mode = config_.mode;
    ctx.tree_root = keyx_.leader();
    ctx.now_ms = now_ms;
    if (should_forward(ctx, router_, dedup_)) {
      SealedMessage copy = msg;
      --copy.ttl;
      if (queue_.enqueue(std::move(copy))) {
        dedup_.mark_forwarded(msg.origin, msg.origin_seq);
        ++counters_.forwarded;
      }
    }
  }
  flush_queue(out);
}

void Engine::handle_ogm(const Frame& frame, std::uint64_t now_ms, Output& out) {
  const OgmDecision decision =
      router_.process_ogm(frame.sender, *frame.ogm, now_ms);
  if (!decision.forward) {
    return;
  }
  Frame rebroadcast;
  rebroadcast.frame_type = FrameType::Ogm;
  rebroadcast.sender = config_.id;
  rebroadcast.next_hop_table = bounded_table();
  rebroadcast.ogm = decision.rebroadcast;
  broadcast(std::move(rebroadcast), out);
}

void Engine::handle_keyx(const Frame& frame, const std::vector<std::uint8_t>& raw,
                         std::uint64_t now_ms, Output& out) {
  (void)now_ms;
  if (control_dedup_.note_seen(frame.sender, frame.frame_seq)) {
    return;  // this exact control frame was already processed and re-flooded
  }
  const auto result = keyx_.on_frame(frame.sender, *frame.keyx);
  emit_keyx_bodies(result.replies, out);
  if (frame.sender != config_.id) {
    // Re-flood verbatim so the original sender field survives multi-hop
    // paths; the dedup entry above keeps it to one relay per node.
    out.frames.push_back(raw);
    ++counters_.frames_sent;
  }
}

void Engine::emit_keyx_bodies(std::vector<KeyxBody> bodies, Output& out) {
  for (KeyxBody& body : bodies) {
    Frame frame;
    frame.frame_type = FrameType::Keyx;
    frame.sender = config_.id;
    frame.keyx = std::move(body);
    // Pre-mark our own control frame so the flood's echo is not re-relayed.
    control_dedup_.note_seen(config_.id, next_frame_seq_);
    broadcast(std::move(frame), out);
  }
}

void Engine::emit_ogm_frame(Output& out) {
  Frame frame;
  frame.frame_type = FrameType::Ogm;
  frame.sender = config_.id;
  frame.next_hop_table = bounded_table();
  frame.ogm = router_.emit_ogm();
  broadcast(std::move(frame), out);
}

void Engine::flush_queue(Output& out) {
  if (queue_.empty()) {
    return;
  }
  std::vector<Frame> frames = aggregate(config_.id, queue_, bounded_table(),
                                        config_.mtu_bytes, next_frame_seq_);
  counters_.oversize_dropped = queue_.oversize_dropped();
  for (const Frame& frame : frames) {
    out.frames.push_back(encode_frame(frame, CodecLimits{config_.mtu_bytes}));
    ++counters_.frames_sent;
  }
}

void Engine::broadcast(Frame frame, Output& out) {
  frame.frame_seq = next_frame_seq_++;
  out.frames.push_back(encode_frame(frame, CodecLimits{config_.mtu_bytes}));
  ++counters_.frames_sent;
}

std::vector<NextHopEntry> Engine::bounded_table() {
  // Leave room for one maximum-size sealed message (32 + 255 bytes) beside
  // the 10-byte header; the wire format caps a single frame's table anyway.
  const std::size_t reserved = 10 + 32 + 255;
  if (config_.mtu_bytes <= reserved + 5) {
    return {};
  }
  const std::size_t max_entries = std::min<std::size_t>(
      kMaxNhtEntriesPerFrame, (config_.mtu_bytes - reserved) / 5);
  return router_.advertised_table(max_entries);
}

EngineSnapshot Engine::snapshot() const {
  EngineSnapshot snap;
  snap.id = config_.id;
  snap.mode = config_.mode;
  snap.keyx_phase = keyx_.phase();
  snap.routes = router_.routes();
  snap.tree = router_.spanning_tree(keyx_.leader(), last_event_ms_);
  snap.replay_highest = replay_.highest_seen();
  snap.counters = counters_;
  return snap;
}

}  // namespace swarmcast
