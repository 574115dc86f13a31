// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <mcoin/rng.hpp>

#include <bit>

namespace mcoin {

namespace {
using u128 = unsigned __int128;
} // namespace

// splitmix64 finalizer; full-period increment in next().
uint64_t Rng::scramble(uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

uint64_t Rng::next()
{
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

uint64_t Rng::below(uint64_t n)
{
    // Multiply-shift map of the full 64-bit draw onto [0, n). The bias is
    // on the order of n / 2^64, far below anything the simulator measures.
    return uint64_t((u128(next()) * n) >> 64);
}

uint64_t neg_ln_q32(uint32_t u)
{
    // -ln(u/2^32) = ln2 * (32 - log2 u). Normalise u to a Q32 mantissa in
    // [1, 2) and extract fractional log2 bits by repeated squaring: squaring
    // doubles the exponent, so each step shifts one bit of log2 into view.
    int e = 63 - std::countl_zero(uint64_t(u)); // floor(log2 u), 0..31
    uint64_t m = uint64_t(u) << (32 - e);       // [2^32, 2^33)
    uint64_t frac = 0;                          // Q32 fraction of log2 u
    for (int i = 0; i < 32; ++i) {
        m = uint64_t((u128(m) * m) >> 32);      // [2^32, 2^34)
        frac <<= 1;
        if (m >= (uint64_t(1) << 33)) {
            m >>= 1;
            frac |= 1;
        }
    }
    uint64_t neg_log2 = (uint64_t(32 - e) << 32) - frac;
    const uint64_t kLn2Q32 = 0xB17217F8ull; // round(ln 2 * 2^32)
    return uint64_t((u128(neg_log2) * kLn2Q32) >> 32);
}

uint64_t Rng::exp_ticks(uint64_t mean)
{
    uint32_t u;
    do {
        u = uint32_t(next() >> 32);
    } while (u == 0);
    uint64_t ticks = uint64_t((u128(mean) * neg_ln_q32(u)) >> 32);
    return ticks == 0 ? 1 : ticks;
}

} // namespace mcoin
