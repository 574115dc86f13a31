// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <mcoin/hash.hpp>
#include <mcoin/keys.hpp>
#include <mcoin/merkle.hpp>
#include <mcoin/nvalue.hpp>
#include <mcoin/serialize.hpp>
#include <mcoin/validation.hpp>

#include <algorithm>
#include <optional>

namespace mcoin {

namespace {

using u128 = unsigned __int128;

struct CoinIn {
    size_t vin_index;
    OutPoint prevout;
    uint64_t amount;
    Bytes owner;
    bool signed_;
};

struct RoleIn {
    size_t vin_index;
    OutPoint prevout;
    Bytes account;
    RoleSet brought_raw;    // live grants carried by this vin
    RoleSet brought_usable; // minus globally disabled roles
};

struct CoinOut {
    uint32_t index;
    uint64_t amount;
    Bytes owner;
};

struct RoleOut {
    uint32_t index;
    bool add;
    RoleSet roles;
    Bytes target;
};

struct PolicyOut {
    uint32_t index;
    bool permanent;
    uint32_t ptype;
    uint32_t param;
    Bytes issuer;
};

TxVerdict fail(Err e) {
    TxVerdict v;
    v.err = e;
    return v;
}

// Failure codes from covering attempts, ranked so that the most specific
// explanation survives when several vins almost qualified.
int err_rank(Err e) {
    switch (e) {
    case Err::FrozenAccount: return 6;
    case Err::RoleNotHeld: return 5;
    case Err::LDepthViolation: return 4;
    case Err::RoleDisabledByPolicy: return 3;
    case Err::UnknownTarget: return 2;
    default: return 1; // NotCovered
    }
}

void note_failure(std::optional<Err>& best, Err e) {
    if (!best || err_rank(e) > err_rank(*best)) best = e;
}

// Tries to justify one role-change vout with one vin under one capacity.
// Returns Err::None on success; a specific failure code otherwise.
Err try_cover(Capacity cap, const AccountTree& tree, const Bytes& coverer,
              RoleSet brought, const RoleOut& out) {
    bool exists = tree.exists(out.target);
    bool frozen = exists && tree.node(out.target).frozen;
    switch (cap) {
    case Capacity::M: {
        if (!brought.contains(Role::M)) return Err::NotCovered;
        if (!tree.covers(coverer, out.target)) return Err::NotCovered;
        if (!out.roles.subset_of(tree.active_roles(coverer)))
            return Err::RoleNotHeld;
        if (!out.add && !exists) return Err::UnknownTarget;
        if (out.add && frozen) return Err::FrozenAccount;
        return Err::None;
    }
    case Capacity::A: {
        if (!brought.contains(Role::A)) return Err::NotCovered;
        if (out.roles != RoleSet{Role::U}) return Err::NotCovered;
        if (out.add) {
            if (!exists) return Err::None; // fresh: adopt as a new leaf
            if (frozen) return Err::FrozenAccount;
            if (tree.active_roles(out.target).contains(Role::U))
                return tree.covers(coverer, out.target) ? Err::None
                                                        : Err::NotCovered;
            // adoption re-parents; refuse anything that would loop
            if (out.target == coverer || tree.is_ancestor(out.target, coverer))
                return Err::NotCovered;
            return Err::None;
        }
        if (!exists) return Err::UnknownTarget;
        return tree.is_ancestor(coverer, out.target) ? Err::None
                                                     : Err::NotCovered;
    }
    case Capacity::L: {
        if (!brought.contains(Role::L)) return Err::NotCovered;
        if (out.roles != RoleSet{Role::U}) return Err::NotCovered;
        if (!exists) return Err::UnknownTarget;
        if (tree.depth(out.target) <= tree.depth(coverer))
            return Err::LDepthViolation;
        return Err::None;
    }
    case Capacity::Genesis:
        return Err::NotCovered;
    }
    return Err::NotCovered;
}

} // namespace

TxVerdict validate_tx(const Transaction& tx, const ValidationContext& ctx,
                      uint32_t tx_index) {
    const SignatureScheme& scheme = SignatureScheme::get(ctx.params.scheme_id);

    if (tx.n_version != kTxVersion) return fail(Err::BadVersion);
    if (tx.vin.empty() || tx.vout.empty()) return fail(Err::EmptyList);
    Hash32 id = tx_id(tx);
    if (ctx.seen_txids.count(id)) return fail(Err::DuplicateTransaction);

    // Null inputs mark coinbases, which never pass through here.
    for (const TxIn& in : tx.vin)
        if (in.prevout.is_null()) return fail(Err::BadCoinbaseShape);

    // Outputs: decode every value word, pin the 33-byte account convention.
    std::vector<CoinOut> coin_outs;
    std::vector<RoleOut> role_outs;
    std::vector<PolicyOut> policy_outs;
    for (uint32_t i = 0; i < tx.vout.size(); ++i) {
        const TxOut& out = tx.vout[i];
        NValue nv;
        Err err = Err::None;
        if (!try_decode_nvalue(out.n_value, nv, err)) return fail(err);
        if (out.script_pubkey.size() != 33) return fail(Err::BadScript);
        if (const auto* c = std::get_if<CoinTransfer>(&nv)) {
            coin_outs.push_back({i, c->amount, out.script_pubkey});
        } else if (const auto* r = std::get_if<RoleChange>(&nv)) {
            role_outs.push_back({i, r->add, r->roles, out.script_pubkey});
        } else {
            const auto& p = std::get<PolicyChange>(nv);
            policy_outs.push_back(
                {i, p.permanent, p.ptype, p.param, out.script_pubkey});
        }
    }

    // Inputs: no outpoint may appear twice, every outpoint must resolve to
    // an unspent coin or a live role grant.
    {
        std::set<OutPoint> seen;
        for (const TxIn& in : tx.vin)
            if (!seen.insert(in.prevout).second) return fail(Err::DoubleSpend);
    }

    std::vector<CoinIn> coin_ins;
    std::vector<RoleIn> role_ins;
    for (size_t i = 0; i < tx.vin.size(); ++i) {
        const TxIn& in = tx.vin[i];
        auto u = ctx.utxo.find(in.prevout);
        if (u != ctx.utxo.end()) {
            coin_ins.push_back({i, in.prevout, u->second.amount,
                                u->second.owner, in.script_sig.has_value()});
            continue;
        }
        const auto* src = ctx.tree.grant_at(in.prevout);
        if (!src) return fail(Err::DoubleSpend);
        RoleSet raw;
        for (int r = 0; r < 5; ++r) {
            if (!src->granted.contains(Role(r))) continue;
            auto g = ctx.tree.grant_for(src->account, Role(r));
            if (g && g->active && g->outpoint == in.prevout) raw.add(Role(r));
        }
        if (raw.empty()) return fail(Err::RoleRevoked);
        RoleSet usable;
        for (int r = 0; r < 5; ++r)
            if (raw.contains(Role(r)) && ctx.policy.role_enabled(Role(r)))
                usable.add(Role(r));
        if (!in.script_sig) return fail(Err::SignatureInvalid);
        role_ins.push_back({i, in.prevout, src->account, raw, usable});
    }

    // Signatures all commit to the same digest.
    Hash32 digest = tx_digest(tx);
    for (size_t i = 0; i < tx.vin.size(); ++i) {
        const TxIn& in = tx.vin[i];
        if (!in.script_sig) continue;
        const Bytes* owner = nullptr;
        for (const CoinIn& c : coin_ins)
            if (c.vin_index == i) owner = &c.owner;
        for (const RoleIn& r : role_ins)
            if (r.vin_index == i) owner = &r.account;
        if (in.script_sig->pubkey != *owner) return fail(Err::SignatureInvalid);
        if (!scheme.verify(in.script_sig->pubkey, digest,
                           in.script_sig->signature))
            return fail(Err::SignatureInvalid);
    }

    // Unsigned coin inputs ride only on a usable L role (forced moves).
    bool forced = false;
    for (const CoinIn& c : coin_ins) forced = forced || !c.signed_;
    if (forced) {
        bool l_usable = false, l_raw = false;
        uint64_t l_depth = ~uint64_t(0);
        for (const RoleIn& r : role_ins) {
            if (r.brought_raw.contains(Role::L)) l_raw = true;
            if (r.brought_usable.contains(Role::L)) {
                l_usable = true;
                l_depth = std::min(l_depth, ctx.tree.depth(r.account));
            }
        }
        if (!l_usable)
            return fail(l_raw ? Err::RoleDisabledByPolicy
                              : Err::SignatureInvalid);
        if (!ctx.policy.effective(5))
            return fail(Err::RoleDisabledByPolicy);
        for (const CoinIn& c : coin_ins) {
            if (c.signed_) continue;
            if (!ctx.tree.exists(c.owner)) return fail(Err::UnresolvableInput);
            if (ctx.tree.depth(c.owner) <= l_depth)
                return fail(Err::LDepthViolation);
        }
    }

    TxVerdict v;
    v.cls.has_coin_transfer = !coin_outs.empty() || !coin_ins.empty();
    v.cls.has_role_change = !role_outs.empty();
    v.cls.has_policy_change = !policy_outs.empty();
    for (const RoleIn& r : role_ins)
        if (r.brought_raw.contains(Role::M)) v.cls.is_management = true;

    // Who-may-own-coins rule: voluntary senders and all receivers must hold
    // an active U role and prove it with a vin. Forced spends skip the
    // sender side entirely; their receivers still need membership but no
    // proof (the L holder cannot produce other accounts' signatures).
    if (v.cls.has_coin_transfer) {
        bool any_signed_coin = false;
        for (const CoinIn& c : coin_ins) any_signed_coin |= c.signed_;
        bool voluntary = any_signed_coin || (!coin_outs.empty() && !forced);
        if (voluntary && !ctx.policy.role_enabled(Role::U))
            return fail(Err::RoleDisabledByPolicy);

        auto u_proof = [&](const Bytes& who, bool& raw_only) {
            raw_only = false;
            for (const RoleIn& r : role_ins) {
                if (r.account != who) continue;
                if (r.brought_usable.contains(Role::U)) return true;
                if (r.brought_raw.contains(Role::U)) raw_only = true;
            }
            return false;
        };
        auto membership = [&](const Bytes& who) -> Err {
            if (!ctx.tree.exists(who)) return Err::MissingURole;
            if (ctx.tree.node(who).frozen) return Err::FrozenAccount;
            if (!ctx.tree.active_roles(who).contains(Role::U))
                return Err::MissingURole;
            return Err::None;
        };

        std::set<Bytes> senders, receivers;
        for (const CoinIn& c : coin_ins)
            if (c.signed_) senders.insert(c.owner);
        for (const CoinOut& c : coin_outs) receivers.insert(c.owner);

        for (const Bytes& s : senders) {
            Err m = membership(s);
            if (m != Err::None) return fail(m);
            bool raw_only;
            if (!u_proof(s, raw_only))
                return fail(raw_only ? Err::RoleDisabledByPolicy
                                     : Err::MissingURole);
        }
        for (const Bytes& r : receivers) {
            Err m = membership(r);
            if (m != Err::None) return fail(m);
            if (ctx.params.require_receiver_role_proof && !forced) {
                bool raw_only;
                if (!u_proof(r, raw_only))
                    return fail(raw_only ? Err::RoleDisabledByPolicy
                                         : Err::MissingURole);
            }
        }
    }

    // Role-change outputs, threaded sequentially through a scratch tree so
    // later vouts see earlier ones (a fresh account can be extended within
    // the transaction that created it).
    if (!role_outs.empty()) {
        AccountTree scratch = ctx.tree;
        for (const RoleOut& out : role_outs) {
            std::optional<Err> best_failure;
            const RoleIn* chosen = nullptr;
            Capacity chosen_cap = Capacity::M;
            for (const RoleIn& r : role_ins) {
                for (Capacity cap : {Capacity::M, Capacity::A, Capacity::L}) {
                    Err e = try_cover(cap, scratch, r.account,
                                      r.brought_usable, out);
                    if (e == Err::None) {
                        chosen = &r;
                        chosen_cap = cap;
                        break;
                    }
                    note_failure(best_failure, e);
                    // A vin whose raw roles would have qualified is being
                    // blocked by a global role disable.
                    if (r.brought_usable != r.brought_raw &&
                        try_cover(cap, scratch, r.account, r.brought_raw,
                                  out) == Err::None)
                        note_failure(best_failure, Err::RoleDisabledByPolicy);
                }
                if (chosen) break;
            }
            if (!chosen)
                return fail(best_failure ? *best_failure : Err::NotCovered);
            v.role_effects.push_back({chosen_cap, chosen->account, out.target,
                                      out.add, out.roles, out.index});
            scratch.apply_role_change(
                chosen_cap, chosen->account, out.target, out.add, out.roles,
                OutPoint{id, out.index},
                Provenance{ctx.height, tx_index, out.index});
        }
    }

    // Policy-change outputs: each needs an M proof from the issuing account
    // and must satisfy the policy engine's acceptance rules in sequence.
    if (!policy_outs.empty()) {
        PolicyState scratch_policy = ctx.policy;
        for (const PolicyOut& out : policy_outs) {
            const RoleIn* proof = nullptr;
            bool raw_only = false;
            for (const RoleIn& r : role_ins) {
                if (r.account != out.issuer) continue;
                if (r.brought_usable.contains(Role::M)) {
                    proof = &r;
                    break;
                }
                if (r.brought_raw.contains(Role::M)) raw_only = true;
            }
            if (!proof)
                return fail(raw_only ? Err::RoleDisabledByPolicy
                                     : Err::RoleNotHeld);
            auto prio = ctx.tree.authority(out.issuer);
            if (!prio) return fail(Err::RoleNotHeld);
            PolicyRecord rec{out.ptype,
                             out.param,
                             out.permanent,
                             out.issuer,
                             *prio,
                             Provenance{ctx.height, tx_index, out.index}};
            Err e = scratch_policy.check(rec);
            if (e != Err::None) return fail(e);
            scratch_policy.apply(rec);
            v.policy_records.push_back(std::move(rec));
        }
    }

    // Coin conservation: creation needs a C proof and room under both the
    // per-block limit and the 63-bit supply domain; otherwise the shortfall
    // is the fee and must clear the minimum.
    u128 in_sum = 0, out_sum = 0;
    for (const CoinIn& c : coin_ins) in_sum += c.amount;
    for (const CoinOut& c : coin_outs) out_sum += c.amount;
    if (out_sum > in_sum) {
        u128 created = out_sum - in_sum;
        bool c_usable = false, c_raw = false;
        for (const RoleIn& r : role_ins) {
            c_usable |= r.brought_usable.contains(Role::C);
            c_raw |= r.brought_raw.contains(Role::C);
        }
        if (!c_usable)
            return fail(c_raw ? Err::RoleDisabledByPolicy
                              : Err::CoinCreationWithoutC);
        if (u128(ctx.utxo_total) + created > u128(kCoinAmountMax))
            return fail(Err::AmountOverflow);
        uint64_t limit = ctx.policy.effective(6);
        if (limit > 0 && u128(ctx.block_created) + created > u128(limit))
            return fail(Err::CoinCreationLimitExceeded);
        v.created = uint64_t(created);
    } else if (!coin_ins.empty()) {
        u128 fee = in_sum - out_sum;
        if (fee < u128(ctx.policy.effective(12)))
            return fail(Err::FeeBelowMinimum);
        v.fee = uint64_t(fee);
    }

    v.ok = true;
    return v;
}

void apply_tx(const Transaction& tx, const TxVerdict& verdict,
              ValidationContext& ctx, uint32_t tx_index) {
    Hash32 id = tx_id(tx);
    ctx.seen_txids.insert(id);

    for (const TxIn& in : tx.vin) {
        auto u = ctx.utxo.find(in.prevout);
        if (u == ctx.utxo.end()) continue; // role vins are not consumed
        ctx.utxo_total -= u->second.amount;
        ctx.utxo.erase(u);
    }
    for (uint32_t i = 0; i < tx.vout.size(); ++i) {
        const TxOut& out = tx.vout[i];
        if (!is_coin_mode(out.n_value)) continue;
        ctx.utxo[OutPoint{id, i}] = UtxoEntry{out.n_value, out.script_pubkey};
        ctx.utxo_total += out.n_value;
    }
    for (const RoleEffect& e : verdict.role_effects) {
        ctx.tree.apply_role_change(
            e.cap, e.coverer, e.target, e.add, e.roles,
            OutPoint{id, e.vout_index},
            Provenance{ctx.height, tx_index, e.vout_index});
    }
    for (PolicyRecord rec : verdict.policy_records) {
        rec.position = Provenance{ctx.height, tx_index, rec.position.vout_index};
        ctx.policy.apply(rec);
    }
    ctx.block_created += verdict.created;
    ctx.total_created += verdict.created;
    ctx.total_fees += verdict.fee;
}

namespace {

// Structural and signature checks for a coinbase; the amount bound is
// checked by the caller once fees are known.
Err check_coinbase(const Transaction& cb, const ValidationContext& ctx,
                   uint64_t height) {
    const SignatureScheme& scheme = SignatureScheme::get(ctx.params.scheme_id);
    if (cb.n_version != kTxVersion) return Err::BadVersion;
    if (cb.vin.size() != 2 || cb.vout.size() != 1)
        return Err::BadCoinbaseShape;
    if (!cb.vin[0].prevout.is_null() || cb.vin[0].script_sig)
        return Err::BadCoinbaseShape;
    // Unique per height, so identical payouts at different heights cannot
    // collide to one txid.
    if (cb.n_lock_time != uint32_t(height)) return Err::BadCoinbaseShape;

    NValue nv;
    Err err = Err::None;
    if (!try_decode_nvalue(cb.vout[0].n_value, nv, err)) return err;
    if (!std::holds_alternative<CoinTransfer>(nv)) return Err::BadCoinbaseShape;
    if (cb.vout[0].script_pubkey.size() != 33) return Err::BadScript;

    const TxIn& proof = cb.vin[1];
    if (proof.prevout.is_null()) return Err::BadCoinbaseShape;
    const auto* src = ctx.tree.grant_at(proof.prevout);
    if (!src) return Err::MissingMinerURole;
    if (src->account != cb.vout[0].script_pubkey) return Err::BadCoinbaseShape;
    if (!src->granted.contains(Role::U)) return Err::MissingMinerURole;
    auto g = ctx.tree.grant_for(src->account, Role::U);
    if (!g || !g->active || g->outpoint != proof.prevout)
        return Err::MissingMinerURole;
    if (ctx.tree.node(src->account).frozen) return Err::MissingMinerURole;

    if (!proof.script_sig) return Err::SignatureInvalid;
    if (proof.script_sig->pubkey != src->account) return Err::SignatureInvalid;
    if (!scheme.verify(proof.script_sig->pubkey, tx_digest(cb),
                       proof.script_sig->signature))
        return Err::SignatureInvalid;
    return Err::None;
}

bool tx_is_management(const Transaction& tx, const ValidationContext& ctx) {
    for (const TxIn& in : tx.vin) {
        if (in.prevout.is_null()) continue;
        const auto* src = ctx.tree.grant_at(in.prevout);
        if (!src || !src->granted.contains(Role::M)) continue;
        auto g = ctx.tree.grant_for(src->account, Role::M);
        if (g && g->active && g->outpoint == in.prevout) return true;
    }
    return false;
}

} // namespace

BlockResult validate_block(const Block& b, ValidationContext& ctx,
                           uint64_t reward, bool check_pow) {
    if (check_pow) {
        if (b.header.target != ctx.params.pow_target) return {Err::BadPoW};
        if (!meets_target(block_hash(b.header), ctx.params.pow_target))
            return {Err::BadPoW};
    }
    if (b.txs.empty()) return {Err::BadCoinbaseShape};

    std::vector<Hash32> ids;
    ids.reserve(b.txs.size());
    for (const Transaction& tx : b.txs) ids.push_back(tx_id(tx));
    if (merkle_root(ids) != b.header.merkle_root) return {Err::BadMerkleRoot};

    ctx.height += 1;
    ctx.block_created = 0;

    // Quota window bookkeeping uses the parent's effective policies; a
    // change of either parameter re-anchors the window here.
    uint32_t n_eff = ctx.policy.effective(13);
    uint32_t k_eff = ctx.policy.effective(14);
    if (n_eff != ctx.quota_n || k_eff != ctx.quota_k) {
        ctx.quota_n = n_eff;
        ctx.quota_k = k_eff;
        ctx.quota_anchor = ctx.height;
        ctx.window_mgmt = 0;
        ctx.window_policy_mgmt = 0;
    }

    // Coinbase: structure first, amount once fees are known. Its output
    // lands in the UTXO set immediately so later transactions in the same
    // block can spend it.
    const Transaction& cb = b.txs[0];
    if (ctx.seen_txids.count(ids[0])) return {Err::DuplicateTransaction};
    Err cbe = check_coinbase(cb, ctx, ctx.height);
    if (cbe != Err::None) return {cbe};
    uint64_t cb_amount = cb.vout[0].n_value;
    if (u128(ctx.utxo_total) + cb_amount > u128(kCoinAmountMax))
        return {Err::AmountOverflow};
    uint64_t block_mgmt = tx_is_management(cb, ctx) ? 1 : 0;
    uint64_t block_policy_mgmt = 0;
    ctx.seen_txids.insert(ids[0]);
    ctx.utxo[OutPoint{ids[0], 0}] =
        UtxoEntry{cb_amount, cb.vout[0].script_pubkey};
    ctx.utxo_total += cb_amount;

    u128 fees = 0;
    for (size_t i = 1; i < b.txs.size(); ++i) {
        TxVerdict v = validate_tx(b.txs[i], ctx, uint32_t(i));
        if (!v.ok) return {v.err};
        if (v.cls.is_management) {
            ++block_mgmt;
            if (v.cls.has_policy_change) ++block_policy_mgmt;
        }
        apply_tx(b.txs[i], v, ctx, uint32_t(i));
        fees += v.fee;
    }

    if (u128(cb_amount) > u128(reward) + fees) return {Err::ExcessReward};
    ctx.total_coinbase += cb_amount;

    // Management quota: a window closes with this block when it is the
    // n-th since the anchor; a deficient window invalidates the block.
    if (ctx.quota_n > 0) {
        ctx.window_mgmt += block_mgmt;
        ctx.window_policy_mgmt += block_policy_mgmt;
        if (ctx.height - ctx.quota_anchor + 1 == ctx.quota_n) {
            if (ctx.params.enforce_quota &&
                (ctx.window_mgmt < ctx.quota_k || ctx.window_policy_mgmt < 1))
                return {Err::QuotaViolation};
            ctx.window_mgmt = 0;
            ctx.window_policy_mgmt = 0;
            ctx.quota_anchor = ctx.height + 1;
        }
    }
    return {Err::None};
}

} // namespace mcoin
