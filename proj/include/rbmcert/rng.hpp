#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace rbmcert {

// Philox4x32-10 block function (Salmon et al. 2011, Random123).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

// Counter-based stream: (seed, replica, purpose, step, block) -> 128 bits.
// Draws for different replicas, purposes or steps never share counters, so
// results do not depend on evaluation order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint32_t replica, std::uint16_t purpose)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        replica_(replica),
        purpose_(purpose) {}

  // Two uniforms in (0, 1) with 53-bit resolution.
  std::array<double, 2> uniform_pair(std::uint64_t step, std::uint16_t block) const {
    const auto r = philox4x32({static_cast<std::uint32_t>(step),
                               static_cast<std::uint32_t>(step >> 32), replica_,
                               (static_cast<std::uint32_t>(purpose_) << 16) | block},
                              key_);
    return {to_unit(r[0], r[1]), to_unit(r[2], r[3])};
  }

  // n standard normals (Box-Muller), using blocks 0 .. ceil(n/2) - 1.
  void normals(std::uint64_t step, double* out, int n, std::uint16_t first_block = 0) const {
    for (int k = 0; k < n; k += 2) {
      const auto u = uniform_pair(step, static_cast<std::uint16_t>(first_block + k / 2));
      const double r = std::sqrt(-2.0 * std::log(u[0]));
      const double a = 2.0 * M_PI * u[1];
      out[k] = r * std::cos(a);
      if (k + 1 < n) out[k + 1] = r * std::sin(a);
    }
  }

  void uniforms(std::uint64_t step, double* out, int n, std::uint16_t first_block = 0) const {
    for (int k = 0; k < n; k += 2) {
      const auto u = uniform_pair(step, static_cast<std::uint16_t>(first_block + k / 2));
      out[k] = u[0];
      if (k + 1 < n) out[k + 1] = u[1];
    }
  }

 private:
  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t replica_;
  std::uint16_t purpose_;
};

}  // namespace rbmcert
