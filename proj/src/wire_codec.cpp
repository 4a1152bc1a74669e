#include "swarmcast/wire_codec.hpp"

#include <cstring>

namespace swarmcast {

namespace {

constexpr std::size_t kHeaderSize = 10;
constexpr std::size_t kNhtEntrySize = 5;
constexpr std::size_t kMessageOverhead = 32;  // origin..ct_len (16) + tag (16)
constexpr std::size_t kOgmBodySize = 5;
constexpr std::size_t kPubkeyBodySize = 1 + 32;
constexpr std::size_t kWrappedBodySize = 1 + 2 + 16 + 16;

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) {
  out.push_back(v);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

struct Reader {
  std::span<const std::uint8_t> raw;
  std::size_t pos = 0;

  bool have(std::size_t n) const { return raw.size() - pos >= n; }

  std::uint8_t u8() { return raw[pos++]; }

  std::uint16_t u16() {
    std::uint16_t v = static_cast<std::uint16_t>(
        (static_cast<std::uint16_t>(raw[pos]) << 8) | raw[pos + 1]);
    pos += 2;
    return v;
  }

  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v = (v << 8) | raw[pos + i];
    }
    pos += 4;
    return v;
  }

  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v = (v << 8) | raw[pos + i];
    }
    pos += 8;
    return v;
  }
};

[[noreturn]] void invariant(const std::string& what) {
  throw CodecError(EncodeError::InvariantViolation, what);
}

}  // namespace

const char* to_string(DecodeError err) {
  switch (err) {
    case DecodeError::None:
      return "none";
    case DecodeError::Truncated:
      return "truncated";
    case DecodeError::BadVersion:
      return "bad_version";
    case DecodeError::BadFrameType:
      return "bad_frame_type";
    case DecodeError::CountMismatch:
      return "count_mismatch";
  }
  return "unknown";
}

std::size_t encoded_size(const Frame& frame) {
  std::size_t size = kHeaderSize + kNhtEntrySize * frame.next_hop_table.size();
  switch (frame.frame_type) {
    case FrameType::Data:
      for (const SealedMessage& msg : frame.messages) {
        size += kMessageOverhead + msg.ciphertext.size();
      }
      break;
    case FrameType::Ogm:
      size += kOgmBodySize;
      break;
    case FrameType::Keyx:
      if (frame.keyx && frame.keyx->phase == KeyxPhase::Wrapped) {
        size += kWrappedBodySize;
      } else {
        size += kPubkeyBodySize;
      }
      break;
  }
  return size;
}

std::vector<std::uint8_t> encode_frame(const Frame& frame,
                                       const CodecLimits& limits) {
  if (frame.version != kProtocolVersion) {
    invariant("frame version must be " + std::to_string(kProtocolVersion));
  }
  if (frame.next_hop_table.size() > kMaxNhtEntriesPerFrame) {
    invariant("next-hop table exceeds " +
              std::to_string(kMaxNhtEntriesPerFrame) + " entries");
  }
  switch (frame.frame_type) {
    case FrameType::Data:
      if (frame.messages.empty() || frame.messages.size() > 255) {
        invariant("data frame must carry 1..255 messages");
      }
      for (const SealedMessage& msg : frame.messages) {
        if (msg.ciphertext.size() > 255) {
          invariant("ciphertext exceeds 255 bytes");
        }
      }
      break;
    case FrameType::Ogm:
      if (!frame.ogm) {
        invariant("ogm frame missing body");
      }
      if (!frame.messages.empty()) {
        invariant("ogm frame must not carry messages");
      }
      break;
    case FrameType::Keyx:
      if (!frame.keyx) {
        invariant("keyx frame missing body");
      }
      if (frame.keyx->phase != KeyxPhase::Pubkey &&
          frame.keyx->phase != KeyxPhase::Wrapped) {
        invariant("keyx phase must be 1 or 2");
      }
      if (!frame.messages.empty() || !frame.next_hop_table.empty()) {
        invariant("keyx frame must not carry messages or next-hop entries");
      }
      break;
    default:
      invariant("unknown frame type");
  }

  const std::size_t total = encoded_size(frame);
  if (total > limits.mtu_bytes) {
    throw CodecError(EncodeError::SizeExceeded,
                     "encoded frame is " + std::to_string(total) +
                         " bytes, limit " + std::to_string(limits.mtu_bytes));
  }

  std::vector<std::uint8_t> out;
  out.reserve(total);
  put_u8(out, frame.version);
  put_u8(out, static_cast<std::uint8_t>(frame.frame_type));
  put_u16(out, frame.sender);
  put_u32(out, frame.frame_seq);
  put_u8(out, static_cast<std::uint8_t>(frame.next_hop_table.size()));
  put_u8(out, static_cast<std::uint8_t>(
                  frame.frame_type == FrameType::Data ? frame.messages.size()
                                                      : 0));
  for (const NextHopEntry& entry : frame.next_hop_table) {
    put_u16(out, entry.destination);
    put_u16(out, entry.next_hop);
    put_u8(out, entry.hop_count);
  }
  switch (frame.frame_type) {
    case FrameType::Data:
      for (const SealedMessage& msg : frame.messages) {
        put_u16(out, msg.origin);
        put_u32(out, msg.origin_seq);
        put_u64(out, msg.timestamp_ms);
        put_u8(out, msg.ttl);
        put_u8(out, static_cast<std::uint8_t>(msg.ciphertext.size()));
        out.insert(out.end(), msg.ciphertext.begin(), msg.ciphertext.end());
        out.insert(out.end(), msg.tag.begin(), msg.tag.end());
      }
      break;
    case FrameType::Ogm:
      put_u16(out, frame.ogm->originator);
      put_u16(out, frame.ogm->ogm_seq);
      put_u8(out, frame.ogm->metric);
      break;
    case FrameType::Keyx:
      put_u8(out, static_cast<std::uint8_t>(frame.keyx->phase));
      if (frame.keyx->phase == KeyxPhase::Pubkey) {
        out.insert(out.end(), frame.keyx->pubkey.begin(),
                   frame.keyx->pubkey.end());
      } else {
        put_u16(out, frame.keyx->member);
        out.insert(out.end(), frame.keyx->wrapped.begin(),
                   frame.keyx->wrapped.end());
        out.insert(out.end(), frame.keyx->wrap_tag.begin(),
                   frame.keyx->wrap_tag.end());
      }
      break;
  }
  return out;
}

DecodeResult decode_frame(std::span<const std::uint8_t> raw) {
  DecodeResult result;
  Reader in{raw};

  auto truncated = [&]() {
    result.error = DecodeError::Truncated;
    result.offset = raw.size();
    return result;
  };

  if (!in.have(kHeaderSize)) {
    return truncated();
  }

  Frame frame;
  frame.version = in.u8();
  if (frame.version != kProtocolVersion) {
    result.error = DecodeError::BadVersion;
    result.offset = 0;
    return result;
  }
  const std::uint8_t type_byte = in.u8();
  if (type_byte > static_cast<std::uint8_t>(FrameType::Keyx)) {
    result.error = DecodeError::BadFrameType;
    result.offset = 1;
    return result;
  }
  frame.frame_type = static_cast<FrameType>(type_byte);
  frame.sender = in.u16();
  frame.frame_seq = in.u32();
  const std::uint8_t nht_count = in.u8();
  const std::uint8_t msg_count = in.u8();

  if (frame.frame_type != FrameType::Data && msg_count != 0) {
    result.error = DecodeError::CountMismatch;
    result.offset = 9;
    return result;
  }
  if (frame.frame_type == FrameType::Data && msg_count == 0) {
    result.error = DecodeError::CountMismatch;
    result.offset = 9;
    return result;
  }
  if (frame.frame_type == FrameType::Keyx && nht_count != 0) {
    result.error = DecodeError::CountMismatch;
    result.offset = 8;
    return result;
  }
  if (nht_count > kMaxNhtEntriesPerFrame) {
    result.error = DecodeError::CountMismatch;
    result.offset = 8;
    return result;
  }

  if (!in.have(static_cast<std::size_t>(nht_count) * kNhtEntrySize)) {
    return truncated();
  }
  frame.next_hop_table.reserve(nht_count);
  for (std::uint8_t i = 0; i < nht_count; ++i) {
    NextHopEntry entry;
    entry.destination = in.u16();
    entry.next_hop = in.u16();
    entry.hop_count = in.u8();
    frame.next_hop_table.push_back(entry);
  }

  switch (frame.frame_type) {
    case FrameType::Data:
      frame.messages.reserve(msg_count);
      for (std::uint8_t i = 0; i < msg_count; ++i) {
        if (!in.have(16)) {  // fixed prefix: origin..ct_len
          return truncated();
        }
        SealedMessage msg;
        msg.origin = in.u16();
        msg.origin_seq = in.u32();
        msg.timestamp_ms = in.u64();
        msg.ttl = in.u8();
        const std::uint8_t ct_len = in.u8();
        if (!in.have(static_cast<std::size_t>(ct_len) + 16)) {
          return truncated();
        }
        msg.ciphertext.assign(raw.begin() + in.pos,
                              raw.begin() + in.pos + ct_len);
        in.pos += ct_len;
        std::memcpy(msg.tag.data(), raw.data() + in.pos, msg.tag.size());
        in.pos += msg.tag.size();
        frame.messages.push_back(std::move(msg));
      }
      break;
    case FrameType::Ogm: {
      if (!in.have(kOgmBodySize)) {
        return truncated();
      }
      OgmBody body;
      body.originator = in.u16();
      body.ogm_seq = in.u16();
      body.metric = in.u8();
      frame.ogm = body;
      break;
    }
    case FrameType::Keyx: {
      if (!in.have(1)) {
        return truncated();
      }
      const std::size_t phase_offset = in.pos;
      const std::uint8_t phase = in.u8();
      KeyxBody body;
      if (phase == static_cast<std::uint8_t>(KeyxPhase::Pubkey)) {
        body.phase = KeyxPhase::Pubkey;
        if (!in.have(body.pubkey.size())) {
          return truncated();
        }
        std::memcpy(body.pubkey.data(), raw.data() + in.pos,
                    body.pubkey.size());
        in.pos += body.pubkey.size();
      } else if (phase == static_cast<std::uint8_t>(KeyxPhase::Wrapped)) {
        body.phase = KeyxPhase::Wrapped;
        if (!in.have(2 + body.wrapped.size() + body.wrap_tag.size())) {
          return truncated();
        }
        body.member = in.u16();
        std::memcpy(body.wrapped.data(), raw.data() + in.pos,
                    body.wrapped.size());
        in.pos += body.wrapped.size();
        std::memcpy(body.wrap_tag.data(), raw.data() + in.pos,
                    body.wrap_tag.size());
        in.pos += body.wrap_tag.size();
      } else {
        result.error = DecodeError::BadFrameType;
        result.offset = phase_offset;
        return result;
      }
      frame.keyx = body;
      break;
    }
  }

  if (in.pos != raw.size()) {
    result.error = DecodeError::CountMismatch;
    result.offset = in.pos;
    return result;
  }

  result.frame = std::move(frame);
  return result;
}

std::array<std::uint8_t, kTelemetryPayloadSize> encode_payload(
    const TelemetryPayload& t) {
  if (t.heading >= 36000) {
    invariant("heading must be below 36000 centidegrees");
  }
  if (t.battery > 100) {
    invariant("battery must be 0..100 percent");
  }
  std::vector<std::uint8_t> buf;
  buf.reserve(kTelemetryPayloadSize);
  put_u32(buf, static_cast<std::uint32_t>(t.latitude));
  put_u32(buf, static_cast<std::uint32_t>(t.longitude));
  put_u32(buf, static_cast<std::uint32_t>(t.altitude_mm));
  put_u16(buf, static_cast<std::uint16_t>(t.velocity_x));
  put_u16(buf, static_cast<std::uint16_t>(t.velocity_y));
  put_u16(buf, static_cast<std::uint16_t>(t.velocity_z));
  put_u16(buf, t.heading);
  put_u8(buf, t.battery);
  std::array<std::uint8_t, kTelemetryPayloadSize> out{};
  std::memcpy(out.data(), buf.data(), out.size());
  return out;
}

PayloadDecodeResult decode_payload(std::span<const std::uint8_t> raw) {
  PayloadDecodeResult result;
  if (raw.size() != kTelemetryPayloadSize) {
    result.error = PayloadError::Truncated;
    return result;
  }
  Reader in{raw};
  TelemetryPayload t;
  t.latitude = static_cast<std::int32_t>(in.u32());
  t.longitude = static_cast<std::int32_t>(in.u32());
  t.altitude_mm = static_cast<std::int32_t>(in.u32());
  t.velocity_x = static_cast<std::int16_t>(in.u16());
  t.velocity_y = static_cast<std::int16_t>(in.u16());
  t.velocity_z = static_cast<std::int16_t>(in.u16());
  t.heading = in.u16();
  t.battery = in.u8();
  if (t.heading >= 36000 || t.battery > 100) {
    result.error = PayloadError::RangeError;
    return result;
  }
  result.payload = t;
  return result;
}

}  // namespace swarmcast
