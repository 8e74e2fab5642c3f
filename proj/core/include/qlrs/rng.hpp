// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

namespace qlrs {

/// One Philox4x32-10 block: encrypts a 128-bit counter under a 64-bit key.
/// Counter-based generation lets every (seed, sample, trial, purpose) tuple
/// own an independent stream that can be opened at any point of a parallel
/// run without carrying generator state around.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Role of a stream within one trial. Keeping roles in the counter layout
/// guarantees e.g. spreading-sequence draws never alias noise draws.
enum class StreamPurpose : std::uint32_t {
  Generic = 0,
  Spreading = 1,
  Bits = 2,
  Noise = 3,
  Initial = 4,
  Experiment = 5,
};

/// A deterministic random stream addressed by (master_seed, sample, trial,
/// purpose). Identical addresses produce bit-identical output regardless of
/// worker count or execution order.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint32_t sample,
            std::uint64_t trial, StreamPurpose purpose)
      : key_{static_cast<std::uint32_t>(master_seed),
             static_cast<std::uint32_t>(master_seed >> 32)},
        ctr_trial_lo_(static_cast<std::uint32_t>(trial)),
        ctr_trial_hi_(static_cast<std::uint32_t>(trial >> 32)),
        ctr_tag_((sample & 0xFFFFFFu) |
                 (static_cast<std::uint32_t>(purpose) << 24)) {
    if (sample >= (1u << 24)) {
      throw std::invalid_argument("RngStream: sample index exceeds 2^24");
    }
  }

  std::uint32_t next_u32() {
    if (word_ == 4) refill();
    return block_[word_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  /// Uniform double in the open interval (0, 1).
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  /// Standard normal via Box-Muller; pairs are cached.
  double normal();

  /// Equiprobable +1/-1, consuming one bit per call.
  double sign() {
    if (bits_left_ == 0) {
      bit_word_ = next_u32();
      bits_left_ = 32;
    }
    const double s = (bit_word_ & 1u) ? 1.0 : -1.0;
    bit_word_ >>= 1;
    --bits_left_;
    return s;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  void refill() {
    block_ = philox4x32({counter_++, ctr_trial_lo_, ctr_trial_hi_, ctr_tag_},
                        key_);
    word_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t ctr_trial_lo_;
  std::uint32_t ctr_trial_hi_;
  std::uint32_t ctr_tag_;
  std::uint32_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int word_ = 4;
  std::uint32_t bit_word_ = 0;
  int bits_left_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qlrs
