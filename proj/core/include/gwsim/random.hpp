#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gwsim {

/// Labels for the independent random streams owned by one trial.
enum class Stream : std::uint64_t {
  Reproduction = 1,
  Control = 2,
  Sex = 3,
  Claims = 4,
  User = 5,
};

/// Identity of a random stream. Identical keys reproduce identical draw
/// sequences regardless of thread scheduling.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t trial_index = 0;
  Stream stream = Stream::Reproduction;
};

/// Per-trial handle: the streams of a trial are derived from it on demand.
struct TrialRng {
  std::uint64_t master_seed = 0;
  std::uint64_t trial_index = 0;

  StreamKey key(Stream s) const { return {master_seed, trial_index, s}; }
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;
std::uint64_t mix64(std::uint64_t x) noexcept;

/// xoshiro256** generator whose state is a pure function of a 64-bit
/// identity. Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(StreamKey key);
  static RandomStream from_identity(std::uint64_t identity);

  /// Child stream `index` of this stream. Depends only on the identity, not
  /// on how many values have been drawn so far.
  RandomStream substream(std::uint64_t index) const;

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t identity() const noexcept { return identity_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  explicit RandomStream(std::uint64_t identity, int);

  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t identity_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace gwsim
