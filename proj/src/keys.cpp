// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <mcoin/errors.hpp>
#include <mcoin/hash.hpp>
#include <mcoin/keys.hpp>

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <cstring>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace mcoin {

namespace {

struct BnDeleter { void operator()(BIGNUM* p) const { BN_free(p); } };
struct BnCtxDeleter { void operator()(BN_CTX* p) const { BN_CTX_free(p); } };
struct PointDeleter { void operator()(EC_POINT* p) const { EC_POINT_free(p); } };
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;
using BnCtxPtr = std::unique_ptr<BN_CTX, BnCtxDeleter>;
using PointPtr = std::unique_ptr<EC_POINT, PointDeleter>;

const EC_GROUP* secp_group() {
    static EC_GROUP* g = EC_GROUP_new_by_curve_name(NID_secp256k1);
    if (!g) throw std::runtime_error("secp256k1 group unavailable");
    return g;
}

const BIGNUM* secp_order() { return EC_GROUP_get0_order(secp_group()); }

BnPtr bn_from_be32(const uint8_t* data) {
    BnPtr bn(BN_bin2bn(data, 32, nullptr));
    if (!bn) throw std::runtime_error("BN_bin2bn failed");
    return bn;
}

void bn_to_be32(const BIGNUM* bn, uint8_t* out) {
    if (BN_bn2binpad(bn, out, 32) != 32)
        throw std::runtime_error("BN_bn2binpad failed");
}

// RFC 6979 nonce generation specialised to SHA-256 with a 256-bit order.
class NonceDrbg {
public:
    NonceDrbg(const Bytes& priv, const Hash32& digest, const BIGNUM* order) {
        std::memset(v_, 0x01, 32);
        std::memset(k_, 0x00, 32);

        // bits2octets(digest): the digest reduced mod the group order.
        BnPtr h = bn_from_be32(digest.data());
        BnPtr hm(BN_new());
        BnCtxPtr ctx(BN_CTX_new());
        if (!hm || !ctx || !BN_mod(hm.get(), h.get(), order, ctx.get()))
            throw std::runtime_error("nonce setup failed");
        uint8_t h_red[32];
        bn_to_be32(hm.get(), h_red);

        step(priv, h_red, 0x00);
        step(priv, h_red, 0x01);
    }

    void next(uint8_t out[32]) {
        Hash32 v = hmac_sha256(key(), v_, 32);
        std::memcpy(v_, v.data(), 32);
        std::memcpy(out, v_, 32);
    }

    void bump() {
        Bytes msg(v_, v_ + 32);
        msg.push_back(0x00);
        Hash32 k = hmac_sha256(key(), msg);
        std::memcpy(k_, k.data(), 32);
        Hash32 v = hmac_sha256(key(), v_, 32);
        std::memcpy(v_, v.data(), 32);
    }

private:
    Bytes key() const { return Bytes(k_, k_ + 32); }

    void step(const Bytes& priv, const uint8_t h_red[32], uint8_t tag) {
        Bytes msg(v_, v_ + 32);
        msg.push_back(tag);
        msg.insert(msg.end(), priv.begin(), priv.end());
        msg.insert(msg.end(), h_red, h_red + 32);
        Hash32 k = hmac_sha256(key(), msg);
        std::memcpy(k_, k.data(), 32);
        Hash32 v = hmac_sha256(key(), v_, 32);
        std::memcpy(v_, v.data(), 32);
    }

    uint8_t v_[32];
    uint8_t k_[32];
};

// Verification results are identical across every node and replay, so a
// process-wide cache is observable only as speed.
class VerifyCache {
public:
    bool lookup(const Hash32& key, bool& result) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = map_.find(key);
        if (it == map_.end()) return false;
        result = it->second;
        return true;
    }
    void insert(const Hash32& key, bool result) {
        std::lock_guard<std::mutex> lock(mu_);
        if (map_.size() >= kMax) map_.clear();
        map_.emplace(key, result);
    }

private:
    struct KeyHash {
        size_t operator()(const Hash32& h) const {
            size_t v;
            std::memcpy(&v, h.data(), sizeof(v));
            return v;
        }
    };
    static constexpr size_t kMax = 1u << 20;
    std::mutex mu_;
    std::unordered_map<Hash32, bool, KeyHash> map_;
};

Hash32 cache_key(const Bytes& pub, const Hash32& digest, const Bytes& sig) {
    Bytes buf;
    buf.reserve(pub.size() + 32 + sig.size());
    buf.insert(buf.end(), pub.begin(), pub.end());
    buf.insert(buf.end(), digest.begin(), digest.end());
    buf.insert(buf.end(), sig.begin(), sig.end());
    return sha256(buf);
}

class Secp256k1Scheme : public SignatureScheme {
public:
    std::string id() const override { return "secp256k1"; }

    KeyPair derive(const Bytes& priv) const override {
        if (priv.size() != 32)
            throw McoinError(Err::BadConfig, "private key must be 32 bytes");
        BnPtr d = bn_from_be32(priv.data());
        if (BN_is_zero(d.get()) || BN_cmp(d.get(), secp_order()) >= 0)
            throw McoinError(Err::BadConfig, "private key out of range");
        BnCtxPtr ctx(BN_CTX_new());
        PointPtr p(EC_POINT_new(secp_group()));
        if (!ctx || !p ||
            !EC_POINT_mul(secp_group(), p.get(), d.get(), nullptr, nullptr,
                          ctx.get()))
            throw std::runtime_error("EC_POINT_mul failed");
        Bytes pub(33);
        if (EC_POINT_point2oct(secp_group(), p.get(),
                               POINT_CONVERSION_COMPRESSED, pub.data(), 33,
                               ctx.get()) != 33)
            throw std::runtime_error("point serialization failed");
        return KeyPair{priv, std::move(pub)};
    }

    Bytes sign(const Bytes& priv, const Hash32& digest) const override {
        if (priv.size() != 32)
            throw McoinError(Err::BadConfig, "private key must be 32 bytes");
        const BIGNUM* n = secp_order();
        BnCtxPtr ctx(BN_CTX_new());
        BnPtr d = bn_from_be32(priv.data());
        if (BN_is_zero(d.get()) || BN_cmp(d.get(), n) >= 0)
            throw McoinError(Err::BadConfig, "private key out of range");
        BnPtr z = bn_from_be32(digest.data());
        BnPtr zm(BN_new()), r(BN_new()), s(BN_new()), kinv(BN_new()),
            tmp(BN_new()), half(BN_new());
        if (!zm || !r || !s || !kinv || !tmp || !half || !ctx)
            throw std::runtime_error("BN alloc failed");
        if (!BN_mod(zm.get(), z.get(), n, ctx.get()))
            throw std::runtime_error("BN_mod failed");

        NonceDrbg drbg(priv, digest, n);
        for (;;) {
            uint8_t kbuf[32];
            drbg.next(kbuf);
            BnPtr k = bn_from_be32(kbuf);
            if (BN_is_zero(k.get()) || BN_cmp(k.get(), n) >= 0) {
                drbg.bump();
                continue;
            }
            PointPtr p(EC_POINT_new(secp_group()));
            if (!p ||
                !EC_POINT_mul(secp_group(), p.get(), k.get(), nullptr, nullptr,
                              ctx.get()))
                throw std::runtime_error("EC_POINT_mul failed");
            BnPtr x(BN_new());
            if (!x ||
                !EC_POINT_get_affine_coordinates(secp_group(), p.get(), x.get(),
                                                 nullptr, ctx.get()))
                throw std::runtime_error("affine coordinates failed");
            if (!BN_mod(r.get(), x.get(), n, ctx.get()))
                throw std::runtime_error("BN_mod failed");
            if (BN_is_zero(r.get())) {
                drbg.bump();
                continue;
            }
            if (!BN_mod_inverse(kinv.get(), k.get(), n, ctx.get()))
                throw std::runtime_error("BN_mod_inverse failed");
            // s = k^-1 (z + r d) mod n
            if (!BN_mod_mul(tmp.get(), r.get(), d.get(), n, ctx.get()) ||
                !BN_mod_add(tmp.get(), tmp.get(), zm.get(), n, ctx.get()) ||
                !BN_mod_mul(s.get(), kinv.get(), tmp.get(), n, ctx.get()))
                throw std::runtime_error("BN arithmetic failed");
            if (BN_is_zero(s.get())) {
                drbg.bump();
                continue;
            }
            // Canonical low-s form.
            if (!BN_rshift1(half.get(), n))
                throw std::runtime_error("BN_rshift1 failed");
            if (BN_cmp(s.get(), half.get()) > 0) {
                if (!BN_sub(s.get(), n, s.get()))
                    throw std::runtime_error("BN_sub failed");
            }
            Bytes sig(64);
            bn_to_be32(r.get(), sig.data());
            bn_to_be32(s.get(), sig.data() + 32);
            return sig;
        }
    }

    bool verify(const Bytes& pub, const Hash32& digest,
                const Bytes& sig) const override {
        Hash32 key = cache_key(pub, digest, sig);
        bool cached;
        if (cache_.lookup(key, cached)) return cached;
        bool ok = verify_uncached(pub, digest, sig);
        cache_.insert(key, ok);
        return ok;
    }

private:
    bool verify_uncached(const Bytes& pub, const Hash32& digest,
                         const Bytes& sig) const {
        if (pub.size() != 33 || sig.size() != 64) return false;
        BnCtxPtr ctx(BN_CTX_new());
        PointPtr q(EC_POINT_new(secp_group()));
        if (!ctx || !q) return false;
        if (!EC_POINT_oct2point(secp_group(), q.get(), pub.data(), 33,
                                ctx.get()))
            return false;
        const BIGNUM* n = secp_order();
        BnPtr r = bn_from_be32(sig.data());
        BnPtr s = bn_from_be32(sig.data() + 32);
        if (BN_is_zero(r.get()) || BN_cmp(r.get(), n) >= 0) return false;
        if (BN_is_zero(s.get()) || BN_cmp(s.get(), n) >= 0) return false;
        // Only low-s signatures count as valid, matching what sign() emits.
        BnPtr half(BN_new());
        if (!half || !BN_rshift1(half.get(), n)) return false;
        if (BN_cmp(s.get(), half.get()) > 0) return false;

        BnPtr z = bn_from_be32(digest.data());
        BnPtr zm(BN_new()), w(BN_new()), u1(BN_new()), u2(BN_new());
        if (!zm || !w || !u1 || !u2) return false;
        if (!BN_mod(zm.get(), z.get(), n, ctx.get())) return false;
        if (!BN_mod_inverse(w.get(), s.get(), n, ctx.get())) return false;
        if (!BN_mod_mul(u1.get(), zm.get(), w.get(), n, ctx.get())) return false;
        if (!BN_mod_mul(u2.get(), r.get(), w.get(), n, ctx.get())) return false;
        PointPtr p(EC_POINT_new(secp_group()));
        if (!p ||
            !EC_POINT_mul(secp_group(), p.get(), u1.get(), q.get(), u2.get(),
                          ctx.get()))
            return false;
        if (EC_POINT_is_at_infinity(secp_group(), p.get())) return false;
        BnPtr x(BN_new()), v(BN_new());
        if (!x || !v ||
            !EC_POINT_get_affine_coordinates(secp_group(), p.get(), x.get(),
                                             nullptr, ctx.get()))
            return false;
        if (!BN_mod(v.get(), x.get(), n, ctx.get())) return false;
        return BN_cmp(v.get(), r.get()) == 0;
    }

    mutable VerifyCache cache_;
};

// Keyed-hash mock with the same shapes as the real scheme. Signatures are
// forgeable by anyone holding the public key; only for test corpora that
// need six-figure signature counts.
class HmacMockScheme : public SignatureScheme {
public:
    std::string id() const override { return "hmac-mock"; }

    KeyPair derive(const Bytes& priv) const override {
        if (priv.size() != 32)
            throw McoinError(Err::BadConfig, "private key must be 32 bytes");
        Hash32 h = sha256(priv);
        Bytes pub;
        pub.reserve(33);
        pub.push_back(0x02);
        pub.insert(pub.end(), h.begin(), h.end());
        return KeyPair{priv, std::move(pub)};
    }

    Bytes sign(const Bytes& priv, const Hash32& digest) const override {
        KeyPair kp = derive(priv);
        Hash32 mac = hmac_sha256(kp.pub, digest.data(), digest.size());
        return Bytes(mac.begin(), mac.end());
    }

    bool verify(const Bytes& pub, const Hash32& digest,
                const Bytes& sig) const override {
        if (pub.size() != 33 || sig.size() != 32) return false;
        Hash32 mac = hmac_sha256(pub, digest.data(), digest.size());
        return std::memcmp(mac.data(), sig.data(), 32) == 0;
    }
};

} // namespace

const SignatureScheme& SignatureScheme::get(const std::string& id) {
    static const Secp256k1Scheme secp;
    static const HmacMockScheme mock;
    if (id == "secp256k1") return secp;
    if (id == "hmac-mock") return mock;
    throw McoinError(Err::BadConfig, "unknown signature scheme: " + id);
}

KeyPair keypair_from_seed(const SignatureScheme& scheme, uint64_t seed) {
    Bytes material;
    const char tag[] = "mcoin/keyseed";
    material.insert(material.end(), tag, tag + sizeof(tag) - 1);
    for (int i = 0; i < 8; ++i) material.push_back(uint8_t(seed >> (8 * i)));
    Hash32 cand = sha256(material);
    for (;;) {
        try {
            return scheme.derive(Bytes(cand.begin(), cand.end()));
        } catch (const McoinError&) {
            cand = sha256(cand.data(), cand.size()); // out of range, rehash
        }
    }
}

} // namespace mcoin
