#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace wcgl {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011). Each
// (key, counter) pair maps to an independent 128-bit block, so draws keyed by
// (seed, mode, step, stream) need no sequential state and parallelize freely.
namespace philox {

inline constexpr uint32_t kW32A = 0x9E3779B9u;
inline constexpr uint32_t kW32B = 0xBB67AE85u;
inline constexpr uint32_t kM4x32A = 0xD2511F53u;
inline constexpr uint32_t kM4x32B = 0xCD9E8D57u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& lo, uint32_t& hi) {
    const uint64_t p = uint64_t(a) * uint64_t(b);
    lo = uint32_t(p);
    hi = uint32_t(p >> 32);
}

inline std::array<uint32_t, 4> block(uint64_t key, uint32_t c0, uint32_t c1,
                                     uint32_t c2, uint32_t c3) {
    uint32_t k0 = uint32_t(key);
    uint32_t k1 = uint32_t(key >> 32);
    std::array<uint32_t, 4> x{c0, c1, c2, c3};
    for (int round = 0; round < 10; ++round) {
        uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kM4x32A, x[0], lo0, hi0);
        mulhilo(kM4x32B, x[2], lo1, hi1);
        x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
        k0 += kW32A;
        k1 += kW32B;
    }
    return x;
}

}  // namespace philox

// Uniform in (0,1]: 53-bit mantissa from two 32-bit words, shifted off zero.
inline double u01_open(uint32_t hi, uint32_t lo) {
    const uint64_t x = (uint64_t(hi) << 21) ^ (uint64_t(lo) >> 11);  // 53 bits
    return (double(x & ((uint64_t(1) << 53) - 1)) + 1.0) * 0x1p-53;
}

// Deterministic stream of standard complex Gaussians keyed by coordinates.
struct NoiseStream {
    uint64_t seed = 0;

    // CN(0,1): E|z|^2 = 1, E z^2 = 0 (re and im are independent N(0, 1/2)).
    std::complex<double> cn01(uint32_t stream, uint32_t step, int kx, int ky) const {
        const uint32_t cx = uint32_t(int64_t(kx) + 0x40000000LL);
        const uint32_t cy = uint32_t(int64_t(ky) + 0x40000000LL);
        const auto b = philox::block(seed, step, cx, cy, stream);
        const double u1 = u01_open(b[0], b[1]);
        const double u2 = u01_open(b[2], b[3]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        // Box-Muller pair (r cos, r sin) are independent N(0,1);
        // dividing by sqrt(2) makes E|z|^2 = 1.
        const double ang = kTwoPi_prng * u2;
        return {r * std::cos(ang) * kInvSqrt2, r * std::sin(ang) * kInvSqrt2};
    }

    double normal(uint32_t stream, uint32_t step, int kx, int ky) const {
        const std::complex<double> z = cn01(stream, step, kx, ky);
        return z.real() * kSqrt2;
    }

    static constexpr double kTwoPi_prng = 6.283185307179586476925286766559;
    static constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;
    static constexpr double kSqrt2 = 1.4142135623730950488016887242097;
};

// Stream ids; keeping them distinct keeps every consumer on its own
// counter subspace.
namespace streams {
inline constexpr uint32_t kStationaryInit = 0;
inline constexpr uint32_t kIncrement = 1;
inline constexpr uint32_t kInitialData = 2;
inline constexpr uint32_t kScalarMc = 3;
inline constexpr uint32_t kFieldSample = 4;
inline constexpr uint32_t kBootstrap = 5;
}  // namespace streams

}  // namespace wcgl
