// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef MCOIN_HASH_HPP
#define MCOIN_HASH_HPP

#include <mcoin/bytes.hpp>

namespace mcoin {

Hash32 sha256(const uint8_t* data, size_t len);
inline Hash32 sha256(const Bytes& b) { return sha256(b.data(), b.size()); }

// Double SHA-256, the transaction/block digest function.
Hash32 dsha256(const uint8_t* data, size_t len);
inline Hash32 dsha256(const Bytes& b) { return dsha256(b.data(), b.size()); }

Hash32 hmac_sha256(const Bytes& key, const uint8_t* data, size_t len);
inline Hash32 hmac_sha256(const Bytes& key, const Bytes& msg) {
    return hmac_sha256(key, msg.data(), msg.size());
}

} // namespace mcoin

#endif // MCOIN_HASH_HPP
