// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef MCOIN_BLOCK_HPP
#define MCOIN_BLOCK_HPP

#include <mcoin/bytes.hpp>
#include <mcoin/tx.hpp>

#include <vector>

namespace mcoin {

struct BlockHeader {
    Hash32 prev_block_hash{};
    Hash32 merkle_root{};
    uint32_t timestamp = 0;
    Hash32 target{}; // big-endian threshold, fixed for the whole chain
    uint64_t nonce = 0;

    bool operator==(const BlockHeader&) const = default;
};

struct Block {
    BlockHeader header;
    std::vector<Transaction> txs;

    bool operator==(const Block&) const = default;
};

Hash32 block_hash(const BlockHeader& h);

// PoW test: hash, read as a big-endian 256-bit integer, must not exceed
// the target threshold.
inline bool meets_target(const Hash32& hash, const Hash32& target) {
    for (size_t i = 0; i < 32; ++i) {
        if (hash[i] < target[i]) return true;
        if (hash[i] > target[i]) return false;
    }
    return true;
}

} // namespace mcoin

#endif // MCOIN_BLOCK_HPP
