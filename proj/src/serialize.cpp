// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <mcoin/hash.hpp>
#include <mcoin/serialize.hpp>

namespace mcoin {

namespace {
// Counts above this are nonsensical for any real transaction or block and
// guard the (tx_index << 32 | vout_index) position encoding.
constexpr uint64_t kMaxListLen = 1u << 16;
} // namespace

void ByteWriter::var_int(uint64_t v) {
    if (v < 0xFD) {
        u8(uint8_t(v));
    } else if (v <= 0xFFFF) {
        u8(0xFD);
        u8(uint8_t(v));
        u8(uint8_t(v >> 8));
    } else if (v <= 0xFFFFFFFFu) {
        u8(0xFE);
        u32le(uint32_t(v));
    } else {
        u8(0xFF);
        u64le(v);
    }
}

uint8_t ByteReader::u8() {
    need(1);
    return data_[pos_++];
}

uint32_t ByteReader::u32le() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
}

uint64_t ByteReader::u64le() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
}

uint64_t ByteReader::var_int() {
    uint8_t tag = u8();
    if (tag < 0xFD) return tag;
    uint64_t v;
    if (tag == 0xFD) {
        need(2);
        v = uint64_t(data_[pos_]) | (uint64_t(data_[pos_ + 1]) << 8);
        pos_ += 2;
        if (v < 0xFD) throw McoinError(Err::VarIntOverflow);
    } else if (tag == 0xFE) {
        v = u32le();
        if (v <= 0xFFFF) throw McoinError(Err::VarIntOverflow);
    } else {
        v = u64le();
        if (v <= 0xFFFFFFFFu) throw McoinError(Err::VarIntOverflow);
    }
    return v;
}

Bytes ByteReader::bytes(size_t n) {
    need(n);
    Bytes out(data_ + pos_, data_ + pos_ + n);
    pos_ += n;
    return out;
}

Hash32 ByteReader::hash() {
    need(32);
    Hash32 h;
    for (int i = 0; i < 32; ++i) h[i] = data_[pos_ + i];
    pos_ += 32;
    return h;
}

namespace {

void write_tx(ByteWriter& w, const Transaction& tx, bool blank_sigs) {
    w.u32le(tx.n_version);
    w.var_int(tx.vin.size());
    for (const TxIn& in : tx.vin) {
        w.hash(in.prevout.tx_hash);
        w.u32le(in.prevout.index);
        if (in.script_sig && !blank_sigs) {
            const ScriptSig& s = *in.script_sig;
            w.var_int(2 + s.signature.size() + s.pubkey.size());
            w.u8(uint8_t(s.signature.size()));
            w.bytes(s.signature);
            w.u8(uint8_t(s.pubkey.size()));
            w.bytes(s.pubkey);
        } else {
            w.var_int(0);
        }
        w.u32le(in.sequence);
    }
    w.var_int(tx.vout.size());
    for (const TxOut& out : tx.vout) {
        w.u64le(out.n_value);
        w.var_int(out.script_pubkey.size());
        w.bytes(out.script_pubkey);
    }
    w.u32le(tx.n_lock_time);
}

uint64_t read_count(ByteReader& r) {
    uint64_t n = r.var_int();
    if (n > kMaxListLen) throw McoinError(Err::VarIntOverflow);
    return n;
}

} // namespace

Bytes serialize_tx(const Transaction& tx) {
    if (tx.vin.size() > kMaxListLen || tx.vout.size() > kMaxListLen)
        throw McoinError(Err::VarIntOverflow);
    for (const TxIn& in : tx.vin) {
        if (in.script_sig &&
            (in.script_sig->signature.size() > 0xFF ||
             in.script_sig->pubkey.size() > 0xFF))
            throw McoinError(Err::BadScript);
    }
    ByteWriter w;
    write_tx(w, tx, false);
    return w.take();
}

Transaction read_tx(ByteReader& r) {
    Transaction tx;
    tx.n_version = r.u32le();
    if (tx.n_version != kTxVersion) throw McoinError(Err::BadVersion);
    uint64_t nin = read_count(r);
    if (nin == 0) throw McoinError(Err::EmptyList);
    tx.vin.reserve(nin);
    for (uint64_t i = 0; i < nin; ++i) {
        TxIn in;
        in.prevout.tx_hash = r.hash();
        in.prevout.index = r.u32le();
        uint64_t slen = r.var_int();
        if (slen == 0) {
            in.script_sig.reset();
        } else {
            ScriptSig s;
            uint8_t sig_len = r.u8();
            s.signature = r.bytes(sig_len);
            uint8_t pk_len = r.u8();
            s.pubkey = r.bytes(pk_len);
            if (slen != uint64_t(2) + sig_len + pk_len)
                throw McoinError(Err::BadScript);
            in.script_sig = std::move(s);
        }
        in.sequence = r.u32le();
        tx.vin.push_back(std::move(in));
    }
    uint64_t nout = read_count(r);
    if (nout == 0) throw McoinError(Err::EmptyList);
    tx.vout.reserve(nout);
    for (uint64_t i = 0; i < nout; ++i) {
        TxOut out;
        out.n_value = r.u64le();
        uint64_t plen = r.var_int();
        if (plen > kMaxListLen) throw McoinError(Err::VarIntOverflow);
        out.script_pubkey = r.bytes(plen);
        tx.vout.push_back(std::move(out));
    }
    tx.n_lock_time = r.u32le();
    return tx;
}

Transaction deserialize_tx(const Bytes& raw) {
    ByteReader r(raw);
    Transaction tx = read_tx(r);
    if (!r.done()) throw McoinError(Err::Truncated, "trailing bytes after tx");
    return tx;
}

Hash32 tx_digest(const Transaction& tx) {
    ByteWriter w;
    write_tx(w, tx, true);
    return dsha256(w.data());
}

Hash32 tx_id(const Transaction& tx) { return dsha256(serialize_tx(tx)); }

Bytes serialize_header(const BlockHeader& h) {
    ByteWriter w;
    w.hash(h.prev_block_hash);
    w.hash(h.merkle_root);
    w.u32le(h.timestamp);
    w.hash(h.target);
    w.u64le(h.nonce);
    return w.take();
}

Bytes serialize_block(const Block& b) {
    if (b.txs.size() > kMaxListLen) throw McoinError(Err::VarIntOverflow);
    ByteWriter w;
    w.bytes(serialize_header(b.header));
    w.var_int(b.txs.size());
    for (const Transaction& tx : b.txs) w.bytes(serialize_tx(tx));
    return w.take();
}

Block deserialize_block(const Bytes& raw) {
    ByteReader r(raw);
    Block b;
    b.header.prev_block_hash = r.hash();
    b.header.merkle_root = r.hash();
    b.header.timestamp = r.u32le();
    b.header.target = r.hash();
    b.header.nonce = r.u64le();
    uint64_t n = read_count(r);
    if (n == 0) throw McoinError(Err::EmptyList);
    b.txs.reserve(n);
    for (uint64_t i = 0; i < n; ++i) b.txs.push_back(read_tx(r));
    if (!r.done()) throw McoinError(Err::Truncated, "trailing bytes after block");
    return b;
}

} // namespace mcoin
