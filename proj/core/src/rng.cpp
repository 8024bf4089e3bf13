#include "dtzo/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dtzo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (b + 0x9e3779b97f4a7c15ULL));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, StreamRole role, std::uint32_t index,
                     std::uint32_t purpose_tag) {
  std::uint64_t id = (static_cast<std::uint64_t>(role) << 56) |
                     (static_cast<std::uint64_t>(index) << 24) |
                     static_cast<std::uint64_t>(purpose_tag);
  key_ = mix_key(seed, id);
}

std::uint64_t RngStream::next_raw() { return splitmix64(key_ ^ splitmix64(counter_++)); }

double RngStream::uniform() {
  // 53-bit mantissa in [0, 1)
  return static_cast<double>(next_raw() >> 11) * 0x1.0p-53;
}

double RngStream::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

Vec RngStream::gaussian_vec(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("gaussian_vec: dim must be >= 1");
  Vec v(dim);
  for (auto& x : v) x = gaussian();
  return v;
}

RngStream RngStream::substream(std::uint32_t tag) const {
  return RngStream(mix_key(key_, 0xd1f0u ^ static_cast<std::uint64_t>(tag)));
}

}  // namespace dtzo
