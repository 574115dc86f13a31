// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <mcoin/errors.hpp>
#include <mcoin/hash.hpp>
#include <mcoin/merkle.hpp>

namespace mcoin {

Hash32 merkle_root(std::vector<Hash32> layer) {
    if (layer.empty()) throw McoinError(Err::EmptyList, "merkle of nothing");
    while (layer.size() > 1) {
        std::vector<Hash32> next;
        next.reserve((layer.size() + 1) / 2);
        for (size_t i = 0; i < layer.size(); i += 2) {
            const Hash32& a = layer[i];
            const Hash32& b = (i + 1 < layer.size()) ? layer[i + 1] : layer[i];
            uint8_t buf[64];
            for (int j = 0; j < 32; ++j) buf[j] = a[j];
            for (int j = 0; j < 32; ++j) buf[32 + j] = b[j];
            next.push_back(dsha256(buf, 64));
        }
        layer = std::move(next);
    }
    return layer[0];
}

} // namespace mcoin
