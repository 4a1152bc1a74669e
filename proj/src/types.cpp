#include "swarmcast/types.hpp"

namespace swarmcast {

bool serial_newer(std::uint16_t a, std::uint16_t b) {
  // Serial-number comparison over a 16-bit circle: a is newer than b when
  // the forward distance b -> a is in (0, 2^15). The exact half-way point
  // compares as not-newer in either direction.
  return static_cast<std::int16_t>(static_cast<std::uint16_t>(a - b)) > 0;
}

const char* to_string(ForwardingMode mode) {
  switch (mode) {
    case ForwardingMode::PerSourceTrees:
      return "per_source_trees";
    case ForwardingMode::SpanningTree:
      return "spanning_tree";
    case ForwardingMode::NaiveFlood:
      return "naive_flood";
  }
  return "unknown";
}

bool Frame::operator==(const Frame& other) const {
  if (version != other.version || frame_type != other.frame_type ||
      sender != other.sender || frame_seq != other.frame_seq) {
    return false;
  }
  switch (frame_type) {
    case FrameType::Data:
      return next_hop_table == other.next_hop_table &&
             messages == other.messages;
    case FrameType::Ogm:
      return next_hop_table == other.next_hop_table && ogm == other.ogm;
    case FrameType::Keyx: {
      if (!keyx || !other.keyx) {
        return keyx.has_value() == other.keyx.has_value();
      }
      if (keyx->phase != other.keyx->phase) {
        return false;
      }
      if (keyx->phase == KeyxPhase::Pubkey) {
        return keyx->pubkey == other.keyx->pubkey;
      }
      return keyx->member == other.keyx->member &&
             keyx->wrapped == other.keyx->wrapped &&
             keyx->wrap_tag == other.keyx->wrap_tag;
    }
  }
  return false;
}

}  // namespace swarmcast
