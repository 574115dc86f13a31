// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <mcoin/errors.hpp>
#include <mcoin/hash.hpp>

#include <openssl/evp.h>

#include <cstring>
#include <stdexcept>

namespace mcoin {

Bytes from_hex(std::string_view s) {
    Bytes out;
    if (!try_from_hex(s, out))
        throw McoinError(Err::BadHex, "invalid hex string");
    return out;
}

Hash32 sha256(const uint8_t* data, size_t len) {
    Hash32 out{};
    unsigned int outlen = 0;
    if (!EVP_Digest(data, len, out.data(), &outlen, EVP_sha256(), nullptr) ||
        outlen != 32)
        throw std::runtime_error("sha256 failed");
    return out;
}

Hash32 dsha256(const uint8_t* data, size_t len) {
    Hash32 first = sha256(data, len);
    return sha256(first.data(), first.size());
}

// Standard HMAC construction over SHA-256 (RFC 2104).
Hash32 hmac_sha256(const Bytes& key, const uint8_t* data, size_t len) {
    uint8_t k[64] = {0};
    if (key.size() > 64) {
        Hash32 kh = sha256(key);
        std::memcpy(k, kh.data(), 32);
    } else {
        std::memcpy(k, key.data(), key.size());
    }
    Bytes inner;
    inner.reserve(64 + len);
    for (int i = 0; i < 64; ++i) inner.push_back(k[i] ^ 0x36);
    inner.insert(inner.end(), data, data + len);
    Hash32 ih = sha256(inner);

    Bytes outer;
    outer.reserve(64 + 32);
    for (int i = 0; i < 64; ++i) outer.push_back(k[i] ^ 0x5c);
    outer.insert(outer.end(), ih.begin(), ih.end());
    return sha256(outer);
}

} // namespace mcoin
