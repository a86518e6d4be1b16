#pragma once

// Counter-based random numbers (Philox4x32-10). Every draw is a pure function
// of (seed, stream, counter), so parallel consumers never share state and a
// batch replays bit-exactly regardless of scheduling or thread count.

#include <array>
#include <cmath>
#include <cstdint>

namespace semiscore {

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0, std::uint32_t k1) {
  const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
  const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

}  // namespace detail

// One 128-bit block, reference constants and round count.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::uint32_t k0, std::uint32_t k1) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    detail::philox_round(ctr, k0, k1);
  }
  return ctr;
}

// Stream ids are domain-tagged so distinct consumers under one seed can never
// collide (e.g. target draws vs. trajectory noise at the same index).
enum class RngDomain : std::uint64_t {
  target = 1,      // draws from the data distribution
  trajectory = 2,  // integrator noise, stream per trajectory
  forward = 3,     // noising-process draws
  fit = 4,         // training data
  bootstrap = 5,   // resampling indices
  pairs = 6,       // random pair / direction probes
  misc = 7,
};

inline std::uint64_t rng_stream(RngDomain domain, std::uint64_t index) {
  return (static_cast<std::uint64_t>(domain) << 56) | index;
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : k0_(static_cast<std::uint32_t>(seed)),
        k1_(static_cast<std::uint32_t>(seed >> 32)),
        s0_(static_cast<std::uint32_t>(stream)),
        s1_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::array<std::uint32_t, 4> block(std::uint64_t ctr) const {
    return philox4x32({static_cast<std::uint32_t>(ctr), static_cast<std::uint32_t>(ctr >> 32), s0_, s1_},
                      k0_, k1_);
  }

  // Uniform on (0,1); never returns an endpoint.
  double uniform(std::uint64_t ctr) const {
    const auto w = block(ctr);
    return to_unit(join(w[0], w[1]));
  }

  // Two independent uniforms from one block (for rejection steps).
  std::array<double, 2> uniform2(std::uint64_t ctr) const {
    const auto w = block(ctr);
    return {to_unit(join(w[0], w[1])), to_unit(join(w[2], w[3]))};
  }

  // Standard normal pair, Box-Muller on one block. Branch-free, so the
  // counter->value map stays static across call sites.
  std::array<double, 2> normal_pair(std::uint64_t ctr) const {
    const auto w = block(ctr);
    const double u1 = to_unit(join(w[0], w[1]));
    const double u2 = to_unit(join(w[2], w[3]));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

  double normal(std::uint64_t ctr) const { return normal_pair(ctr)[0]; }

  // Fills out[0..n) from consecutive blocks starting at ctr; returns the next
  // free counter. Callers reserve counter ranges, never interleave.
  std::uint64_t fill_normal(std::uint64_t ctr, double* out, int n) const {
    int i = 0;
    for (; i + 1 < n; i += 2) {
      const auto z = normal_pair(ctr++);
      out[i] = z[0];
      out[i + 1] = z[1];
    }
    if (i < n) out[i] = normal(ctr++);
    return ctr;
  }

 private:
  static std::uint64_t join(std::uint32_t lo, std::uint32_t hi) {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
  }
  static double to_unit(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  std::uint32_t k0_, k1_, s0_, s1_;
};

}  // namespace semiscore
