#include "gwsim/random.hpp"

namespace gwsim {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  std::uint64_t s = x;
  return splitmix64(s);
}

namespace {

std::uint64_t combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ mix64(b + 0x632BE59BD9B4E019ULL));
}

}  // namespace

RandomStream::RandomStream(StreamKey key)
    : RandomStream(combine(combine(mix64(key.master_seed), key.trial_index),
                           static_cast<std::uint64_t>(key.stream)),
                   0) {}

RandomStream RandomStream::from_identity(std::uint64_t identity) {
  return RandomStream(identity, 0);
}

RandomStream::RandomStream(std::uint64_t identity, int) : identity_(identity) {
  std::uint64_t s = identity;
  for (auto& word : state_) word = splitmix64(s);
  // All-zero state is a fixed point of xoshiro.
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

RandomStream RandomStream::substream(std::uint64_t index) const {
  return RandomStream(combine(identity_, index ^ 0xD1B54A32D192ED03ULL), 0);
}

}  // namespace gwsim
