#pragma once

// Counter-based random numbers (Philox4x32-10, Salmon et al. SC'11).
//
// A stream is identified by (master_seed, replica). The key carries the
// master seed and the upper half of the counter carries the replica index,
// so replica r draws the same numbers no matter which thread runs it.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace hawkes {

class Philox {
 public:
  using result_type = std::uint32_t;
  using block_type = std::array<std::uint32_t, 4>;
  using key_type = std::array<std::uint32_t, 2>;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  Philox(std::uint64_t master_seed, std::uint64_t replica)
      : key_{static_cast<std::uint32_t>(master_seed),
             static_cast<std::uint32_t>(master_seed >> 32)},
        counter_{0, 0, static_cast<std::uint32_t>(replica),
                 static_cast<std::uint32_t>(replica >> 32)} {}

  explicit Philox(std::uint64_t master_seed = 0) : Philox(master_seed, 0) {}

  // Ten-round bijection of a 128-bit counter under a 64-bit key.
  static block_type bijection(block_type ctr, key_type key) {
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

  result_type operator()() {
    if (position_ == 4) refill();
    return buffer_[position_++];
  }

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  // Skips `blocks` 128-bit outputs of the current stream.
  void discard_blocks(std::uint64_t blocks) {
    std::uint64_t low = (static_cast<std::uint64_t>(counter_[1]) << 32) | counter_[0];
    low += blocks;
    counter_[0] = static_cast<std::uint32_t>(low);
    counter_[1] = static_cast<std::uint32_t>(low >> 32);
    position_ = 4;
  }

  void discard(unsigned long long n) {
    for (unsigned long long i = 0; i < n; ++i) (*this)();
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57;
  static constexpr std::uint32_t kW0 = 0x9E3779B9;
  static constexpr std::uint32_t kW1 = 0xBB67AE85;

  static block_type single_round(const block_type& c, const key_type& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  void refill() {
    buffer_ = bijection(counter_, key_);
    position_ = 0;
    if (++counter_[0] == 0) ++counter_[1];
  }

  key_type key_;
  block_type counter_;
  block_type buffer_{};
  int position_ = 4;
};

// Stream r of a run seeded with `master_seed`.
inline Philox replica_stream(std::uint64_t master_seed, std::uint64_t replica) {
  return Philox(master_seed, replica);
}

}  // namespace hawkes
