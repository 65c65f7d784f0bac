#pragma once

#include <array>
#include <cstdint>

namespace qtrack {

// Philox4x32-10 counter-based generator. Output is a pure function of
// (key, counter), so ensembles keyed by (seed, segment, stream) produce the
// same numbers regardless of worker count or execution order.
struct Philox4x32 {
  static std::array<std::uint32_t, 4> block(const std::array<std::uint32_t, 2>& key,
                                            const std::array<std::uint32_t, 4>& ctr);
};

/// Independent noise streams within one segment.
enum class NoiseStream : std::uint32_t {
  init = 0,
  process_x = 1,
  process_y = 2,
  shot_x = 3,
  shot_y = 4,
  carrier_shot = 5,
};

/// Sequential stream of standard normal deviates, keyed by
/// (seed, segment, stream). Box-Muller over Philox blocks: block j yields
/// deviates 2j and 2j+1, so the stream is also random-access per block.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t segment, NoiseStream stream);

  double next();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_id_;
  std::uint32_t segment_;
  std::uint64_t block_ = 0;
  double pair_[2] = {0.0, 0.0};
  int have_ = 0;
};

}  // namespace qtrack
