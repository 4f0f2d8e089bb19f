#pragma once

#include <cstdint>
#include <limits>

namespace powerburr {

/// Counter-based random stream keyed by (master_seed, stream_id).
///
/// The i-th draw is a pure function of (master_seed, stream_id, i), so a
/// replication or chunk that owns its stream produces the same variates no
/// matter which thread runs it. Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
      : master_seed_(master_seed), stream_id_(stream_id) {
    key0_ = mix(master_seed ^ 0x6a09e667f3bcc909ULL);
    key1_ = mix(stream_id + 0xbb67ae8584caa73bULL + (key0_ << 1));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (counter_++) * 0x9e3779b97f4a7c15ULL + key0_;
    z = mix(z) ^ key1_;
    return mix(z);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Child stream, deterministic in (this stream's identity, index).
  RngStream substream(std::uint64_t index) const noexcept {
    return RngStream(master_seed_, mix(stream_id_ * 0xd1b54a32d192ed03ULL + index + 1));
  }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t position() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t key0_;
  std::uint64_t key1_;
  std::uint64_t counter_ = 0;
};

}  // namespace powerburr
