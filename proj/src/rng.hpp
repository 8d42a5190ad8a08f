#ifndef DDTWA_RNG_HPP
#define DDTWA_RNG_HPP

#include <array>
#include <cstdint>

namespace ddtwa {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// One block maps a (counter, key) pair to 128 pseudo-random bits; there is
// no sequential state, so any draw can be addressed directly.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key);

// Logical sub-streams. Each noise channel and each sampling stage owns a
// distinct purpose tag so draws never collide across uses.
enum class StreamPurpose : std::uint32_t {
  spin_init = 1,
  cavity_init = 2,
  disorder = 3,
  ou_init = 4,
  dephasing = 5,
  dephasing_collective = 6,
  decay = 7,
  decay_improved = 8,
  decay_qle = 9,
  cavity_loss = 10,
  ou_step = 11,
};

// Random stream for one trajectory, keyed by (master seed, trajectory index).
// Every draw is addressed by (purpose, spin, index); trajectories can be
// evaluated in any order, on any worker, with identical results.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint32_t trajectory)
      : key_{static_cast<std::uint32_t>(master_seed),
             static_cast<std::uint32_t>(master_seed >> 32)},
        trajectory_(trajectory) {}

  std::uint64_t bits(StreamPurpose purpose, std::uint32_t spin, std::uint32_t index) const {
    const auto out = block(purpose, spin, index);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  }

  // Two independent uniforms: first in (0,1], second in [0,1).
  std::array<double, 2> uniform_pair(StreamPurpose purpose, std::uint32_t spin,
                                     std::uint32_t index) const;

  // Two independent standard normals (Box-Muller on one Philox block).
  std::array<double, 2> normal_pair(StreamPurpose purpose, std::uint32_t spin,
                                    std::uint32_t index) const;

  std::uint32_t trajectory() const { return trajectory_; }

 private:
  std::array<std::uint32_t, 4> block(StreamPurpose purpose, std::uint32_t spin,
                                     std::uint32_t index) const {
    return philox4x32({index, spin, trajectory_, static_cast<std::uint32_t>(purpose)}, key_);
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t trajectory_;
};

}  // namespace ddtwa

#endif
