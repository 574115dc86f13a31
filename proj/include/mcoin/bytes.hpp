// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef MCOIN_BYTES_HPP
#define MCOIN_BYTES_HPP

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mcoin {

using Bytes = std::vector<uint8_t>;
using Hash32 = std::array<uint8_t, 32>;

inline constexpr char kHexDigits[] = "0123456789abcdef";

inline std::string to_hex(const uint8_t* data, size_t len) {
    std::string out;
    out.reserve(len * 2);
    for (size_t i = 0; i < len; ++i) {
        out.push_back(kHexDigits[data[i] >> 4]);
        out.push_back(kHexDigits[data[i] & 0x0F]);
    }
    return out;
}

inline std::string to_hex(const Bytes& b) { return to_hex(b.data(), b.size()); }
inline std::string to_hex(const Hash32& h) { return to_hex(h.data(), h.size()); }

// Returns -1 for non-hex characters.
inline int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

// Strict: even length, hex digits only.
inline bool try_from_hex(std::string_view s, Bytes& out) {
    if (s.size() % 2 != 0) return false;
    out.clear();
    out.reserve(s.size() / 2);
    for (size_t i = 0; i < s.size(); i += 2) {
        int hi = hex_nibble(s[i]);
        int lo = hex_nibble(s[i + 1]);
        if (hi < 0 || lo < 0) return false;
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return true;
}

Bytes from_hex(std::string_view s); // throws McoinError(BadHex)

inline Hash32 hash_from_bytes(const Bytes& b) {
    Hash32 h{};
    for (size_t i = 0; i < 32 && i < b.size(); ++i) h[i] = b[i];
    return h;
}

inline Bytes bytes_of(const Hash32& h) { return Bytes(h.begin(), h.end()); }

inline constexpr Hash32 kZeroHash{};

} // namespace mcoin

#endif // MCOIN_BYTES_HPP
