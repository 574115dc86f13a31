// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef MCOIN_VALIDATION_HPP
#define MCOIN_VALIDATION_HPP

#include <mcoin/accounts.hpp>
#include <mcoin/block.hpp>
#include <mcoin/bytes.hpp>
#include <mcoin/errors.hpp>
#include <mcoin/policy.hpp>
#include <mcoin/tx.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace mcoin {

// Parameters fixed at genesis (plus one node-local stance flag).
struct ChainParams {
    std::string scheme_id = "secp256k1";
    Hash32 pow_target{};
    uint64_t initial_reward = 0;
    uint64_t reward_epoch = 1;
    bool require_receiver_role_proof = true;
    // Node-local: whether quota deficits invalidate blocks. Consensus nodes
    // keep this on; the simulator models rule-diverging miners by clearing
    // it. Not part of the chain identity.
    bool enforce_quota = true;
    bool operator==(const ChainParams&) const = default;
};

struct UtxoEntry {
    uint64_t amount = 0;
    Bytes owner; // public key the coins are locked to
    bool operator==(const UtxoEntry&) const = default;
};

struct TxClassification {
    bool is_coinbase = false;
    bool has_coin_transfer = false;
    bool has_role_change = false;
    bool has_policy_change = false;
    bool is_management = false; // some vin proves an account holding M
    bool operator==(const TxClassification&) const = default;
};

// One planned role-change application, fixed during validation so that
// applying a transaction never re-derives covering decisions.
struct RoleEffect {
    Capacity cap = Capacity::M;
    Bytes coverer;
    Bytes target;
    bool add = true;
    RoleSet roles;
    uint32_t vout_index = 0;
};

struct TxVerdict {
    bool ok = false;
    Err err = Err::None;
    TxClassification cls;
    uint64_t fee = 0;
    uint64_t created = 0;
    std::vector<RoleEffect> role_effects;
    std::vector<PolicyRecord> policy_records;
};

// Full chain state after some block. Copyable; copies diverge independently.
struct ValidationContext {
    ChainParams params;
    AccountTree tree;
    PolicyState policy;
    std::map<OutPoint, UtxoEntry> utxo;
    std::set<Hash32> seen_txids;

    uint64_t height = 0; // height of the last applied block

    // Quota window in force and progress within it.
    uint64_t quota_anchor = 1; // first height of the current window
    uint32_t quota_n = 0;
    uint32_t quota_k = 0;
    uint64_t window_mgmt = 0;
    uint64_t window_policy_mgmt = 0;

    uint64_t block_created = 0; // coin creation within the current block

    // Supply audit accumulators:
    //   utxo_total == total_coinbase + total_created - total_fees
    uint64_t utxo_total = 0;
    uint64_t total_coinbase = 0;
    uint64_t total_created = 0;
    uint64_t total_fees = 0;

    bool operator==(const ValidationContext&) const = default;
};

// Judges one non-coinbase transaction against the context. tx_index is the
// transaction's position in the block under construction (0 for mempool
// screening); ctx.height must already be the height of that block.
TxVerdict validate_tx(const Transaction& tx, const ValidationContext& ctx,
                      uint32_t tx_index = 0);

// Applies a transaction previously judged ok. The verdict must come from
// validate_tx on this exact context.
void apply_tx(const Transaction& tx, const TxVerdict& verdict,
              ValidationContext& ctx, uint32_t tx_index);

struct BlockResult {
    Err err = Err::None;
    bool ok() const { return err == Err::None; }
};

// Validates and applies a full block on top of ctx (the parent state).
// `reward` is the subsidy for this height, computed from the parent state.
// On success ctx is the state after the block; on failure ctx is garbage
// and must be discarded.
BlockResult validate_block(const Block& b, ValidationContext& ctx,
                           uint64_t reward, bool check_pow = true);

} // namespace mcoin

#endif // MCOIN_VALIDATION_HPP
