#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "macsim/time.hpp"

namespace macsim {

inline constexpr NodeId kBroadcast = std::numeric_limits<NodeId>::max();
inline constexpr std::uint64_t kNoPayload = 0;

enum class FrameKind : std::uint8_t {
  SYNC,
  RTS,
  CTS,
  DATA,
  ACK,
  FRTS,
  PREAMBLE,
  PREAMBLE_BLOCK,
  STROBE,
  STROBE_ACK,
};

const char* frame_kind_name(FrameKind k);

// One on-air unit. A single record with optional fields is shared by all
// protocols so overhearers can inspect foreign frames.
struct Frame {
  FrameKind kind = FrameKind::DATA;
  NodeId src = 0;
  NodeId dst = kBroadcast;
  Tick airtime = 0;
  Tick duration_field = 0;    // remaining exchange time (RTS/CTS/FRTS), for NAV
  std::uint32_t countdown = 0;  // remaining blocks/strobes
  bool more_bit = false;        // WiseMAC: more data queued for dst
  bool mts_flag = false;        // DMAC: more-to-send
  Tick sampling_offset = 0;     // WiseMAC ACK: time to sender's next sample;
                                // SMAC SYNC: time to sender's next active period
  std::uint32_t depth_level = 0;  // DMAC level flood
  std::uint64_t payload_id = kNoPayload;
};

}  // namespace macsim
