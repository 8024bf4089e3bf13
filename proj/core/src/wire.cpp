#include "dtzo/wire.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <stdexcept>

namespace dtzo::wire {

namespace {

constexpr char kMagic[4] = {'D', 'T', 'Z', '0'};
constexpr std::size_t kHeader = 4 + 1 + 4;

static_assert(std::endian::native == std::endian::little,
              "wire codec assumes a little-endian host");

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
         std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

std::uint32_t payload_crc(const std::uint8_t* p, std::size_t n) {
  return static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), p, static_cast<uInt>(n)));
}

}  // namespace

std::size_t frame_size(std::size_t n_scalars) {
  return kHeader + 8 * n_scalars + 4;
}

std::vector<std::uint8_t> encode_frame(std::uint8_t tag, const Vec& payload) {
  std::vector<std::uint8_t> out;
  out.reserve(frame_size(payload.size()));
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(tag);
  put_u32(out, static_cast<std::uint32_t>(payload.size()));

  std::size_t body = out.size();
  out.resize(body + 8 * payload.size());
  if (!payload.empty())
    std::memcpy(out.data() + body, payload.data(), 8 * payload.size());
  put_u32(out, payload_crc(out.data() + body, 8 * payload.size()));
  return out;
}

Frame decode_frame(const std::uint8_t* data, std::size_t size) {
  if (size < kHeader + 4) throw std::runtime_error("wire: truncated frame");
  if (std::memcmp(data, kMagic, 4) != 0)
    throw std::runtime_error("wire: bad magic");
  std::uint8_t tag = data[4];
  if (tag < tag_worker_update || tag > tag_shutdown)
    throw std::runtime_error("wire: unknown tag " + std::to_string(tag));
  std::uint32_t count = get_u32(data + 5);
  if (size < frame_size(count))
    throw std::runtime_error("wire: truncated payload");

  const std::uint8_t* body = data + kHeader;
  std::uint32_t want = get_u32(body + 8 * std::size_t(count));
  if (payload_crc(body, 8 * std::size_t(count)) != want)
    throw std::runtime_error("wire: CRC mismatch");

  Frame f;
  f.tag = tag;
  f.payload.resize(count);
  if (count) std::memcpy(f.payload.data(), body, 8 * std::size_t(count));
  return f;
}

Frame decode_frame(const std::vector<std::uint8_t>& buf) {
  return decode_frame(buf.data(), buf.size());
}

}  // namespace dtzo::wire
