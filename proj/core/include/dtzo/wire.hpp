#pragma once

#include <cstdint>
#include <vector>

#include "dtzo/vec.hpp"

namespace dtzo {

// Binary frame layout (all little-endian):
//   4 bytes  magic "DTZ0"
//   1 byte   tag
//   4 bytes  payload scalar count
//   8*count  payload, IEEE-754 binary64
//   4 bytes  CRC32 of the payload bytes
namespace wire {

inline constexpr std::uint8_t tag_worker_update = 1;
inline constexpr std::uint8_t tag_master_broadcast = 2;
inline constexpr std::uint8_t tag_phi_round_up = 3;
inline constexpr std::uint8_t tag_phi_round_down = 4;
inline constexpr std::uint8_t tag_shutdown = 5;

struct Frame {
  std::uint8_t tag = 0;
  Vec payload;
};

std::size_t frame_size(std::size_t n_scalars);

std::vector<std::uint8_t> encode_frame(std::uint8_t tag, const Vec& payload);

/// Decodes one frame starting at data[0]. Throws std::runtime_error on
/// short input, bad magic, unknown tag, or CRC mismatch.
Frame decode_frame(const std::uint8_t* data, std::size_t size);
Frame decode_frame(const std::vector<std::uint8_t>& buf);

}  // namespace wire
}  // namespace dtzo
