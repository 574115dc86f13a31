// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef MCOIN_TX_HPP
#define MCOIN_TX_HPP

#include <mcoin/bytes.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

namespace mcoin {

// Transaction version. Every valid transaction carries this constant.
inline constexpr uint32_t kTxVersion = 1944;

inline constexpr uint32_t kNullPrevIndex = 0xFFFFFFFFu;

struct OutPoint {
    Hash32 tx_hash{};
    uint32_t index = 0;

    bool is_null() const { return tx_hash == kZeroHash && index == kNullPrevIndex; }
    static OutPoint null() { return OutPoint{kZeroHash, kNullPrevIndex}; }

    auto operator<=>(const OutPoint&) const = default;
};

// Unlock data: a signature over the transaction digest plus the public key
// it verifies against. Absent entirely on coinbase null inputs and on
// L-forced coin spends.
struct ScriptSig {
    Bytes signature;
    Bytes pubkey;
    bool operator==(const ScriptSig&) const = default;
};

struct TxIn {
    OutPoint prevout;
    std::optional<ScriptSig> script_sig;
    uint32_t sequence = 0xFFFFFFFFu;

    bool operator==(const TxIn&) const = default;
};

struct TxOut {
    uint64_t n_value = 0; // tagged, see nvalue.hpp
    Bytes script_pubkey;  // 33-byte compressed public key of the affected account
    bool operator==(const TxOut&) const = default;
};

struct Transaction {
    uint32_t n_version = kTxVersion;
    std::vector<TxIn> vin;
    std::vector<TxOut> vout;
    uint32_t n_lock_time = 0; // retained for format compatibility, no semantics

    bool operator==(const Transaction&) const = default;
};

} // namespace mcoin

#endif // MCOIN_TX_HPP
