// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <mcoin/block.hpp>
#include <mcoin/hash.hpp>
#include <mcoin/serialize.hpp>

namespace mcoin {

Hash32 block_hash(const BlockHeader& h) {
    return dsha256(serialize_header(h));
}

} // namespace mcoin
