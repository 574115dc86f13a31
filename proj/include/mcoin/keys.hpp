// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef MCOIN_KEYS_HPP
#define MCOIN_KEYS_HPP

#include <mcoin/bytes.hpp>

#include <cstdint>
#include <string>

namespace mcoin {

struct KeyPair {
    Bytes priv; // 32 bytes
    Bytes pub;  // 33 bytes, compressed form with a 0x02/0x03 prefix
};

// Signature scheme behind the chain's account identities. The genesis
// configuration names one by id; all signatures on that chain use it.
//
//   "secp256k1"  ECDSA, deterministic nonces, compact 64-byte low-s
//                signatures. The default.
//   "hmac-mock"  keyed-hash stand-in with the same shapes, for tests that
//                need very large signature counts.
class SignatureScheme {
public:
    virtual ~SignatureScheme() = default;

    virtual std::string id() const = 0;
    // Derives the public key; throws BadConfig for an out-of-range private key.
    virtual KeyPair derive(const Bytes& priv) const = 0;
    virtual Bytes sign(const Bytes& priv, const Hash32& digest) const = 0;
    virtual bool verify(const Bytes& pub, const Hash32& digest,
                        const Bytes& sig) const = 0;

    static const SignatureScheme& get(const std::string& id); // throws BadConfig
};

// Deterministic private key from an integer seed; always in range for
// either scheme. Test and simulation identities come from here.
KeyPair keypair_from_seed(const SignatureScheme& scheme, uint64_t seed);

} // namespace mcoin

#endif // MCOIN_KEYS_HPP
