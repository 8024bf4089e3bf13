#pragma once

#include <cstdint>

#include "dtzo/vec.hpp"

namespace dtzo {

enum class StreamRole : std::uint8_t { master = 0, worker = 1, test = 2 };

// Purpose tags for stream ids. Two streams with distinct (role, index,
// purpose) are independent; the same id plus seed reproduces the same
// sequence regardless of what other streams were drawn in between.
namespace purpose {
inline constexpr std::uint32_t block_x1 = 1;
inline constexpr std::uint32_t block_x2 = 2;
inline constexpr std::uint32_t block_x3 = 3;
inline constexpr std::uint32_t cut_inner = 4;
inline constexpr std::uint32_t cut_outer = 5;
inline constexpr std::uint32_t phi_inner = 6;
inline constexpr std::uint32_t phi_outer = 7;
inline constexpr std::uint32_t init = 8;
inline constexpr std::uint32_t gap = 9;
inline constexpr std::uint32_t data = 10;
inline constexpr std::uint32_t generic = 11;
}  // namespace purpose

/// Counter-based Gaussian/uniform stream. Value semantics: copying a
/// stream snapshots its position, which is how common-random-number
/// re-evaluation works. Draw order is fixed by the counter alone, so
/// results do not depend on worker scheduling.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamRole role, std::uint32_t index,
            std::uint32_t purpose_tag);

  double uniform();   // [0, 1)
  double gaussian();  // N(0, 1)
  Vec gaussian_vec(std::size_t dim);

  /// Derives an independent child stream; deterministic in (this id, tag).
  RngStream substream(std::uint32_t tag) const;

  std::uint64_t counter() const { return counter_; }

 private:
  RngStream(std::uint64_t key) : key_(key) {}
  std::uint64_t next_raw();

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dtzo
