#include "rng.hpp"

#include <cmath>

namespace ddtwa {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& ctr, const std::array<std::uint32_t, 2>& key) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key) {
  std::array<std::uint32_t, 4> ctr = counter;
  std::array<std::uint32_t, 2> k = key;
  for (int r = 0; r < 10; ++r) {
    round_once(ctr, k);
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
  }
  return ctr;
}

std::array<double, 2> RandomStream::uniform_pair(StreamPurpose purpose, std::uint32_t spin,
                                                 std::uint32_t index) const {
  const auto out = block(purpose, spin, index);
  const std::uint64_t a = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  constexpr double kScale = 0x1.0p-53;
  return {static_cast<double>((a >> 11) + 1) * kScale,  // (0,1]
          static_cast<double>(b >> 11) * kScale};       // [0,1)
}

std::array<double, 2> RandomStream::normal_pair(StreamPurpose purpose, std::uint32_t spin,
                                                std::uint32_t index) const {
  const auto u = uniform_pair(purpose, spin, index);
  const double r = std::sqrt(-2.0 * std::log(u[0]));
  const double phase = 2.0 * M_PI * u[1];
  return {r * std::cos(phase), r * std::sin(phase)};
}

}  // namespace ddtwa
