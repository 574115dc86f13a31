// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <cstdint>

namespace mcoin {

// Deterministic generator for the simulator. Everything is integer
// arithmetic so that a (scenario, seed) pair reproduces bit-identical
// event traces on any platform; no libm, no doubles.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(scramble(seed)) {}

    // Independent substream keyed by (seed, a, b); used as (seed, node id,
    // purpose) so each node's draws never interleave with another's.
    Rng(uint64_t seed, uint64_t a, uint64_t b)
        : state_(scramble(scramble(scramble(seed) ^ a) ^ b)) {}

    uint64_t next();
    uint64_t below(uint64_t n); // uniform in [0, n), n > 0
    bool flip() { return next() >> 63; }

    // Exponentially distributed event gap with the given mean, in integer
    // ticks, never zero. Sampled as mean * (-ln U) in Q32 fixed point.
    uint64_t exp_ticks(uint64_t mean);

private:
    static uint64_t scramble(uint64_t x);
    uint64_t state_;
};

// -ln(u / 2^32) in Q32 for u in [1, 2^32); exact bit-recurrence log, exposed
// so tests can pin it against an independent evaluation.
uint64_t neg_ln_q32(uint32_t u);

} // namespace mcoin
