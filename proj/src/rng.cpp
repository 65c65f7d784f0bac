#include "qtrack/rng.hpp"

#include <cmath>

namespace qtrack {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

constexpr double kTwoPiLocal = 6.283185307179586476925286766559;

}  // namespace

std::array<std::uint32_t, 4> Philox4x32::block(const std::array<std::uint32_t, 2>& key,
                                               const std::array<std::uint32_t, 4>& ctr) {
  std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
  std::uint32_t k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c0, hi0, lo0);
    mulhilo(kMul1, c2, hi1, lo1);
    const std::uint32_t n0 = hi1 ^ c1 ^ k0;
    const std::uint32_t n1 = lo1;
    const std::uint32_t n2 = hi0 ^ c3 ^ k1;
    const std::uint32_t n3 = lo0;
    c0 = n0; c1 = n1; c2 = n2; c3 = n3;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return {c0, c1, c2, c3};
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t segment, NoiseStream stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_id_(static_cast<std::uint32_t>(stream)),
      segment_(static_cast<std::uint32_t>(segment)) {}

void NormalStream::refill() {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      stream_id_, segment_};
  const auto r = Philox4x32::block(key_, ctr);
  ++block_;
  const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
  // Map to (0,1): 53-bit mantissa plus half-ulp offset keeps u1 away from 0.
  const double u1 = static_cast<double>(a >> 11) * 0x1.0p-53 + 0x1.0p-54;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53 + 0x1.0p-54;
  const double rad = std::sqrt(-2.0 * std::log(u1));
  pair_[0] = rad * std::cos(kTwoPiLocal * u2);
  pair_[1] = rad * std::sin(kTwoPiLocal * u2);
  have_ = 2;
}

double NormalStream::next() {
  if (have_ == 0) refill();
  return pair_[2 - have_--];
}

}  // namespace qtrack
