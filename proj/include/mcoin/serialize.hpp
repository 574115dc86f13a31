// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef MCOIN_SERIALIZE_HPP
#define MCOIN_SERIALIZE_HPP

#include <mcoin/block.hpp>
#include <mcoin/bytes.hpp>
#include <mcoin/errors.hpp>
#include <mcoin/tx.hpp>

#include <cstdint>

namespace mcoin {

// Wire format, all integers little-endian:
//
//   tx      := version u32 | varint #vin | vin* | varint #vout | vout* |
//              lock_time u32
//   vin     := prev_tx_hash 32B | prev_index u32 | varint len | script_sig |
//              sequence u32
//   script_sig (when len > 0)
//           := sig_len u8 | sig | pubkey_len u8 | pubkey
//   vout    := n_value u64 | varint len | script_pubkey
//   header  := prev_block 32B | merkle_root 32B | timestamp u32 |
//              target 32B | nonce u64
//   block   := header | varint #tx | tx*
//
// Varints are the classic 0xFD/0xFE/0xFF prefixed form and must be minimal;
// a non-minimal encoding fails with VarIntOverflow so that serialization is
// a bijection on the accepted set.

class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u32le(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
    }
    void u64le(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
    }
    void var_int(uint64_t v);
    void bytes(const uint8_t* data, size_t len) {
        buf_.insert(buf_.end(), data, data + len);
    }
    void bytes(const Bytes& b) { bytes(b.data(), b.size()); }
    void hash(const Hash32& h) { bytes(h.data(), h.size()); }

    Bytes take() { return std::move(buf_); }
    const Bytes& data() const { return buf_; }

private:
    Bytes buf_;
};

class ByteReader {
public:
    ByteReader(const uint8_t* data, size_t len) : data_(data), len_(len) {}
    explicit ByteReader(const Bytes& b) : data_(b.data()), len_(b.size()) {}

    uint8_t u8();
    uint32_t u32le();
    uint64_t u64le();
    uint64_t var_int();
    Bytes bytes(size_t n);
    Hash32 hash();

    size_t remaining() const { return len_ - pos_; }
    bool done() const { return pos_ == len_; }

private:
    void need(size_t n) const {
        if (len_ - pos_ < n) throw McoinError(Err::Truncated);
    }
    const uint8_t* data_;
    size_t len_;
    size_t pos_ = 0;
};

Bytes serialize_tx(const Transaction& tx);
// Strict parse: full buffer must be consumed.
Transaction deserialize_tx(const Bytes& raw);
// Parse one transaction from a reader (used inside blocks).
Transaction read_tx(ByteReader& r);

// Digest signed by every input: the serialization with all script_sigs
// replaced by zero-length scripts, double SHA-256.
Hash32 tx_digest(const Transaction& tx);
// Transaction id: double SHA-256 of the full serialization.
Hash32 tx_id(const Transaction& tx);

Bytes serialize_header(const BlockHeader& h);
Bytes serialize_block(const Block& b);
Block deserialize_block(const Bytes& raw);

} // namespace mcoin

#endif // MCOIN_SERIALIZE_HPP
