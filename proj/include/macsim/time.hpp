#pragma once

#include <cstdint>

namespace macsim {

// Virtual time in ticks; 1 tick = 1 microsecond.
using Tick = std::uint64_t;
using NodeId = std::uint32_t;

inline constexpr Tick kTicksPerUs = 1;
inline constexpr Tick kTicksPerMs = 1000;
inline constexpr Tick kTicksPerSec = 1000000;

constexpr Tick us(std::uint64_t v) { return v; }
constexpr Tick ms(std::uint64_t v) { return v * kTicksPerMs; }
constexpr Tick sec(std::uint64_t v) { return v * kTicksPerSec; }

constexpr double to_seconds(Tick t) { return static_cast<double>(t) / 1e6; }
constexpr double to_ms(Tick t) { return static_cast<double>(t) / 1e3; }

// On-air duration of a frame of `bytes` payload at `bitrate_bps`.
constexpr Tick airtime(std::uint32_t bytes, std::uint32_t bitrate_bps) {
  // bytes*8 bits / bitrate, in microseconds, rounded up.
  const std::uint64_t bits = static_cast<std::uint64_t>(bytes) * 8u;
  return (bits * 1000000u + bitrate_bps - 1) / bitrate_bps;
}

}  // namespace macsim
