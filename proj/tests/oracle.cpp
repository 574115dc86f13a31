#include "oracle.hpp"

#include <mcoin/hash.hpp>
#include <mcoin/serialize.hpp>

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace oracle {

using mcoin::Bytes;
using mcoin::Hash32;
using mcoin::OutPoint;
using mcoin::Transaction;

std::string hexstr(const Bytes& b) { return mcoin::to_hex(b); }
std::string hexstr(const Hash32& h) { return mcoin::to_hex(h); }
std::string opstr(const OutPoint& o) {
    return hexstr(o.tx_hash) + ":" + std::to_string(o.index);
}

static std::string letters_of(const std::set<char>& s) {
    std::string out;
    for (char c : std::string("MCLUA"))
        if (s.count(c)) out.push_back(c);
    return out;
}

uint64_t World::depth(const std::string& id) const {
    uint64_t d = 0;
    std::string cur = id;
    for (;;) {
        const Acct& a = accounts.at(cur);
        if (a.parent.empty()) return d;
        cur = a.parent;
        ++d;
    }
}

bool World::on_root_path(const std::string& anc, const std::string& id) const {
    if (!accounts.count(id)) return true; // nobody owns a fresh id yet
    std::string cur = id;
    for (;;) {
        if (cur == anc) return true;
        const Acct& a = accounts.at(cur);
        if (a.parent.empty()) return false;
        cur = a.parent;
    }
}

bool World::strict_ancestor(const std::string& anc,
                            const std::string& id) const {
    if (!accounts.count(id) || anc == id) return false;
    std::string cur = accounts.at(id).parent;
    while (!cur.empty()) {
        if (cur == anc) return true;
        cur = accounts.at(cur).parent;
    }
    return false;
}

uint32_t World::effective(uint32_t type) const {
    // Scan every accepted record: best (lowest) issuer rank wins, and
    // within one rank the latest chain position wins.
    const PolicyRec* best = nullptr;
    for (const PolicyRec& r : policies) {
        if (r.type != type || !r.resolves) continue;
        if (!best || r.rank < best->rank ||
            (r.rank == best->rank && r.position > best->position))
            best = &r;
    }
    if (best) return best->param;
    if (type <= 5 || type == 7) return 1;
    auto it = numeric_defaults.find(type);
    return it == numeric_defaults.end() ? 0 : it->second;
}

bool World::role_on(char letter) const {
    return effective(uint32_t(std::string("MCLUA").find(letter))) != 0;
}

namespace {

struct ValueWord {
    int kind = 0; // 0 coin, 1 role, 2 policy
    uint64_t amount = 0;
    bool flag = false; // add / permanent
    std::set<char> roles;
    uint32_t ptype = 0;
    uint32_t param = 0;
};

// Independent bit-level read of the 64-bit value word.
bool read_value(uint64_t raw, ValueWord& out) {
    if ((raw >> 63) == 0) {
        out.kind = 0;
        out.amount = raw;
        return true;
    }
    if ((raw >> 62) == 2) {
        out.kind = 1;
        out.flag = (raw >> 61) & 1;
        if (raw & ((uint64_t(1) << 56) - 1)) return false;
        const char letters[5] = {'M', 'C', 'L', 'U', 'A'};
        for (int i = 0; i < 5; ++i)
            if ((raw >> (60 - i)) & 1) out.roles.insert(letters[i]);
        return !out.roles.empty();
    }
    out.kind = 2;
    out.flag = (raw >> 61) & 1;
    uint64_t typefield = (raw >> 32) & ((uint64_t(1) << 29) - 1);
    if (typefield >= (uint64_t(1) << 27)) return false;
    out.ptype = uint32_t(typefield);
    out.param = uint32_t(raw & 0xFFFFFFFFull);
    return true;
}

struct OutRow {
    uint32_t idx;
    ValueWord d;
    std::string owner;
};

struct CoinRow {
    size_t vin;
    uint64_t amount;
    std::string owner;
    bool is_signed;
};

struct RoleRow {
    size_t vin;
    std::string acct;
    std::set<char> raw;
    std::set<char> usable;
};

// One (capacity, coverer) attempt at justifying a role-change output.
// Empty string = allowed.
std::string attempt(char cap, const World& w, const std::string& coverer,
                    const std::set<char>& brought, bool add,
                    const std::set<char>& roles, const std::string& target) {
    bool exists = w.accounts.count(target) != 0;
    bool frozen = exists && w.accounts.at(target).frozen;
    if (cap == 'M') {
        if (!brought.count('M')) return "NotCovered";
        if (!w.on_root_path(coverer, target)) return "NotCovered";
        const std::set<char>& held = w.accounts.at(coverer).roles;
        for (char r : roles)
            if (!held.count(r)) return "RoleNotHeld";
        if (!add && !exists) return "UnknownTarget";
        if (add && frozen) return "FrozenAccount";
        return "";
    }
    if (cap == 'A') {
        if (!brought.count('A')) return "NotCovered";
        if (roles != std::set<char>{'U'}) return "NotCovered";
        if (add) {
            if (!exists) return "";
            if (frozen) return "FrozenAccount";
            if (w.accounts.at(target).roles.count('U'))
                return w.on_root_path(coverer, target) ? "" : "NotCovered";
            // adoption would re-parent; a cycle is never allowed
            if (target == coverer || w.strict_ancestor(target, coverer))
                return "NotCovered";
            return "";
        }
        if (!exists) return "UnknownTarget";
        return w.strict_ancestor(coverer, target) ? "" : "NotCovered";
    }
    if (!brought.count('L')) return "NotCovered";
    if (roles != std::set<char>{'U'}) return "NotCovered";
    if (!exists) return "UnknownTarget";
    if (w.depth(target) <= w.depth(coverer)) return "LDepthViolation";
    return "";
}

int failure_rank(const std::string& e) {
    if (e == "FrozenAccount") return 6;
    if (e == "RoleNotHeld") return 5;
    if (e == "LDepthViolation") return 4;
    if (e == "RoleDisabledByPolicy") return 3;
    if (e == "UnknownTarget") return 2;
    return 1;
}

void apply_effect(World& w, const Effect& e, const std::string& txid_hex,
                  uint64_t height, uint32_t tx_index) {
    std::string op = txid_hex + ":" + std::to_string(e.vout);
    if (e.add) {
        auto it = w.accounts.find(e.target);
        if (it == w.accounts.end()) {
            w.accounts[e.target] = Acct{e.coverer, e.roles, false};
        } else {
            Acct& a = it->second;
            if (a.frozen) a.frozen = false; // only the L path gets here frozen
            if (e.cap == 'A' && !a.roles.count('U')) a.parent = e.coverer;
            for (char r : e.roles) a.roles.insert(r);
        }
        w.grants[op] = Grant{e.target, e.roles};
        for (char r : e.roles) w.live[e.target + "/" + r] = op;
        if (e.roles.count('M') && !w.authority.count(e.target))
            w.authority[e.target] = {w.depth(e.target), height,
                                     (uint64_t(tx_index) << 32) | e.vout};
        return;
    }
    Acct& a = w.accounts.at(e.target);
    for (char r : e.roles) {
        a.roles.erase(r);
        w.live.erase(e.target + "/" + r);
    }
    if (e.cap == 'L') {
        a.frozen = true;
        a.roles.erase('U');
        w.live.erase(e.target + "/U");
    }
}

} // namespace

Verdict judge(const Transaction& tx, const World& w,
              const mcoin::SignatureScheme& scheme, uint64_t height,
              uint32_t tx_index) {
    Verdict v;
    auto no = [&](const std::string& why) {
        Verdict r = v;
        r.ok = false;
        r.why = why;
        return r;
    };

    if (tx.n_version != 1944) return no("BadVersion");
    if (tx.vin.empty() || tx.vout.empty()) return no("EmptyList");
    std::string txid = hexstr(mcoin::tx_id(tx));
    if (w.seen.count(txid)) return no("DuplicateTransaction");
    for (const mcoin::TxIn& in : tx.vin)
        if (in.prevout.is_null()) return no("BadCoinbaseShape");

    std::vector<OutRow> rows;
    for (uint32_t i = 0; i < tx.vout.size(); ++i) {
        ValueWord d;
        if (!read_value(tx.vout[i].n_value, d)) return no("Malformed");
        if (tx.vout[i].script_pubkey.size() != 33) return no("BadScript");
        rows.push_back({i, d, hexstr(tx.vout[i].script_pubkey)});
    }

    for (size_t i = 0; i < tx.vin.size(); ++i)
        for (size_t j = i + 1; j < tx.vin.size(); ++j)
            if (tx.vin[i].prevout == tx.vin[j].prevout)
                return no("DoubleSpend");

    std::vector<CoinRow> coins;
    std::vector<RoleRow> proofs;
    for (size_t i = 0; i < tx.vin.size(); ++i) {
        const mcoin::TxIn& in = tx.vin[i];
        std::string key = opstr(in.prevout);
        auto u = w.utxo.find(key);
        if (u != w.utxo.end()) {
            coins.push_back({i, u->second.first, u->second.second,
                             in.script_sig.has_value()});
            continue;
        }
        auto g = w.grants.find(key);
        if (g == w.grants.end()) return no("DoubleSpend");
        std::set<char> raw;
        for (char r : g->second.roles) {
            auto lv = w.live.find(g->second.account + "/" + r);
            if (lv != w.live.end() && lv->second == key) raw.insert(r);
        }
        if (raw.empty()) return no("RoleRevoked");
        if (!in.script_sig) return no("SignatureInvalid");
        std::set<char> usable;
        for (char r : raw)
            if (w.role_on(r)) usable.insert(r);
        proofs.push_back({i, g->second.account, raw, usable});
    }

    Hash32 digest = mcoin::tx_digest(tx);
    for (size_t i = 0; i < tx.vin.size(); ++i) {
        const mcoin::TxIn& in = tx.vin[i];
        if (!in.script_sig) continue;
        std::string owner;
        for (const CoinRow& c : coins)
            if (c.vin == i) owner = c.owner;
        for (const RoleRow& r : proofs)
            if (r.vin == i) owner = r.acct;
        if (hexstr(in.script_sig->pubkey) != owner)
            return no("SignatureInvalid");
        if (!scheme.verify(in.script_sig->pubkey, digest,
                           in.script_sig->signature))
            return no("SignatureInvalid");
    }

    bool forced = false;
    for (const CoinRow& c : coins)
        if (!c.is_signed) forced = true;
    if (forced) {
        bool l_ok = false, l_raw = false;
        uint64_t dl = ~uint64_t(0);
        for (const RoleRow& r : proofs) {
            if (r.raw.count('L')) l_raw = true;
            if (r.usable.count('L')) {
                l_ok = true;
                dl = std::min(dl, w.depth(r.acct));
            }
        }
        if (!l_ok) return no(l_raw ? "RoleDisabledByPolicy" : "SignatureInvalid");
        if (w.effective(5) == 0) return no("RoleDisabledByPolicy");
        for (const CoinRow& c : coins) {
            if (c.is_signed) continue;
            if (!w.accounts.count(c.owner)) return no("UnresolvableInput");
            if (w.depth(c.owner) <= dl) return no("LDepthViolation");
        }
    }

    bool any_coin_out = false;
    for (const OutRow& r : rows) {
        if (r.d.kind == 0) any_coin_out = true;
        if (r.d.kind == 1) v.has_role = true;
        if (r.d.kind == 2) v.has_policy = true;
    }
    v.has_coin = any_coin_out || !coins.empty();
    for (const RoleRow& r : proofs)
        if (r.raw.count('M')) v.is_mgmt = true;

    if (v.has_coin) {
        bool any_signed = false;
        for (const CoinRow& c : coins) any_signed |= c.is_signed;
        bool voluntary = any_signed || (any_coin_out && !forced);
        if (voluntary && !w.role_on('U')) return no("RoleDisabledByPolicy");

        auto has_u_proof = [&](const std::string& who, bool& raw_only) {
            raw_only = false;
            for (const RoleRow& r : proofs) {
                if (r.acct != who) continue;
                if (r.usable.count('U')) return true;
                if (r.raw.count('U')) raw_only = true;
            }
            return false;
        };
        auto member = [&](const std::string& who) -> std::string {
            if (!w.accounts.count(who)) return "MissingURole";
            const Acct& a = w.accounts.at(who);
            if (a.frozen) return "FrozenAccount";
            if (!a.roles.count('U')) return "MissingURole";
            return "";
        };

        std::set<std::string> senders, receivers;
        for (const CoinRow& c : coins)
            if (c.is_signed) senders.insert(c.owner);
        for (const OutRow& r : rows)
            if (r.d.kind == 0) receivers.insert(r.owner);

        for (const std::string& s : senders) {
            std::string m = member(s);
            if (!m.empty()) return no(m);
            bool raw_only;
            if (!has_u_proof(s, raw_only))
                return no(raw_only ? "RoleDisabledByPolicy" : "MissingURole");
        }
        for (const std::string& r : receivers) {
            std::string m = member(r);
            if (!m.empty()) return no(m);
            if (w.require_receiver_proof && !forced) {
                bool raw_only;
                if (!has_u_proof(r, raw_only))
                    return no(raw_only ? "RoleDisabledByPolicy"
                                       : "MissingURole");
            }
        }
    }

    World scratch = w;
    for (const OutRow& row : rows) {
        if (row.d.kind != 1) continue;
        const RoleRow* who = nullptr;
        char how = 0;
        std::string fallback;
        auto note = [&](const std::string& e) {
            if (fallback.empty() || failure_rank(e) > failure_rank(fallback))
                fallback = e;
        };
        for (const RoleRow& r : proofs) {
            for (char cap : {'M', 'A', 'L'}) {
                std::string e = attempt(cap, scratch, r.acct, r.usable,
                                        row.d.flag, row.d.roles, row.owner);
                if (e.empty()) {
                    who = &r;
                    how = cap;
                    break;
                }
                note(e);
                if (r.usable != r.raw &&
                    attempt(cap, scratch, r.acct, r.raw, row.d.flag,
                            row.d.roles, row.owner)
                        .empty())
                    note("RoleDisabledByPolicy");
            }
            if (who) break;
        }
        if (!who) return no(fallback.empty() ? "NotCovered" : fallback);
        Effect eff{how, who->acct, row.owner, row.d.flag, row.d.roles,
                   row.idx};
        v.effects.push_back(eff);
        apply_effect(scratch, eff, txid, height, tx_index);
    }

    for (const OutRow& row : rows) {
        if (row.d.kind != 2) continue;
        const RoleRow* proof = nullptr;
        bool raw_only = false;
        for (const RoleRow& r : proofs) {
            if (r.acct != row.owner) continue;
            if (r.usable.count('M')) {
                proof = &r;
                break;
            }
            if (r.raw.count('M')) raw_only = true;
        }
        if (!proof)
            return no(raw_only ? "RoleDisabledByPolicy" : "RoleNotHeld");
        if (!scratch.authority.count(row.owner)) return no("RoleNotHeld");

        uint32_t t = row.d.ptype;
        uint32_t p = row.d.param;
        if (t >= 16) return no("UnknownType");
        if ((t <= 5 || t == 7) && p > 1) return no("BadParam");
        if (t == 15 && p != 0) return no("BadParam");
        if (scratch.permanent.count({t, row.owner}))
            return no("PermanenceViolation");
        if (t == 10 && p > scratch.effective(11)) return no("DecayAboveMax");
        if (t == 11 && p < scratch.effective(10)) return no("DecayAboveMax");

        PolicyRec rec;
        rec.type = t;
        rec.param = p;
        rec.permanent = row.d.flag;
        rec.issuer = row.owner;
        rec.rank = scratch.authority.at(row.owner);
        rec.position = {height, tx_index, row.idx};
        rec.resolves = (t != 15);
        scratch.policies.push_back(rec);
        if (rec.permanent) scratch.permanent.insert({t, rec.issuer});
        v.policy_effects.push_back(
            {t, p, rec.permanent, rec.issuer, row.idx});
    }

    unsigned __int128 in_sum = 0, out_sum = 0;
    for (const CoinRow& c : coins) in_sum += c.amount;
    for (const OutRow& r : rows)
        if (r.d.kind == 0) out_sum += r.d.amount;
    if (out_sum > in_sum) {
        unsigned __int128 made = out_sum - in_sum;
        bool c_ok = false, c_raw = false;
        for (const RoleRow& r : proofs) {
            c_ok = c_ok || r.usable.count('C');
            c_raw = c_raw || r.raw.count('C');
        }
        if (!c_ok)
            return no(c_raw ? "RoleDisabledByPolicy" : "CoinCreationWithoutC");
        using u128 = unsigned __int128;
        u128 cap = (u128(1) << 63) - 1;
        if (u128(w.utxo_total) + made > cap) return no("AmountOverflow");
        uint64_t limit = w.effective(6);
        if (limit > 0 && u128(w.block_created) + made > u128(limit))
            return no("CoinCreationLimitExceeded");
        v.created = uint64_t(made);
    } else if (!coins.empty()) {
        unsigned __int128 fee = in_sum - out_sum;
        if (fee < w.effective(12)) return no("FeeBelowMinimum");
        v.fee = uint64_t(fee);
    }

    v.ok = true;
    return v;
}

void commit(const Transaction& tx, const Verdict& v, World& w,
            uint64_t height, uint32_t tx_index) {
    if (!v.ok) throw std::logic_error("commit of a rejected transaction");
    std::string txid = hexstr(mcoin::tx_id(tx));
    w.seen.insert(txid);
    for (const mcoin::TxIn& in : tx.vin) {
        std::string key = opstr(in.prevout);
        auto u = w.utxo.find(key);
        if (u == w.utxo.end()) continue;
        w.utxo_total -= u->second.first;
        w.utxo.erase(u);
    }
    for (uint32_t i = 0; i < tx.vout.size(); ++i) {
        uint64_t raw = tx.vout[i].n_value;
        if ((raw >> 63) != 0) continue;
        w.utxo[txid + ":" + std::to_string(i)] = {
            raw, hexstr(tx.vout[i].script_pubkey)};
        w.utxo_total += raw;
    }
    for (const Effect& e : v.effects)
        apply_effect(w, e, txid, height, tx_index);
    for (const PolicyEffect& p : v.policy_effects) {
        PolicyRec rec;
        rec.type = p.type;
        rec.param = p.param;
        rec.permanent = p.permanent;
        rec.issuer = p.issuer;
        rec.rank = w.authority.at(p.issuer);
        rec.position = {height, tx_index, p.vout};
        rec.resolves = (p.type != 15);
        w.policies.push_back(rec);
        if (p.permanent) w.permanent.insert({p.type, p.issuer});
    }
    w.block_created += v.created;
}

// ---------------------------------------------------------------------------

DualWorld::DualWorld(std::map<uint32_t, uint32_t> numeric_defaults)
    : scheme(mcoin::SignatureScheme::get("hmac-mock")) {
    ctx.params.scheme_id = "hmac-mock";
    ctx.policy = mcoin::PolicyState(numeric_defaults);
    ctx.height = 1;
    world.numeric_defaults = std::move(numeric_defaults);
}

mcoin::OutPoint DualWorld::next_setup_outpoint() {
    // Synthetic ids prefixed to stay clear of real txids.
    Hash32 h{};
    h[0] = 0x5e;
    h[1] = 0x07;
    for (int i = 0; i < 8; ++i) h[24 + i] = uint8_t(setup_seq >> (8 * i));
    return OutPoint{h, 0};
}

mcoin::Bytes DualWorld::make_key(uint64_t seed) {
    mcoin::KeyPair kp = mcoin::keypair_from_seed(scheme, seed);
    keys[hexstr(kp.pub)] = kp.priv;
    return kp.pub;
}

mcoin::Bytes DualWorld::add_root(uint64_t seed) {
    Bytes root = make_key(seed);
    OutPoint op = next_setup_outpoint();
    mcoin::Provenance prov{0, uint32_t(setup_seq), 0};
    ctx.tree.create_root(root, mcoin::RoleSet::all(), op, prov);

    std::string r = hexstr(root);
    world.accounts[r] = Acct{"", {'M', 'C', 'L', 'U', 'A'}, false};
    world.root = r;
    world.grants[opstr(op)] = Grant{r, {'M', 'C', 'L', 'U', 'A'}};
    for (char c : std::string("MCLUA")) world.live[r + "/" + c] = opstr(op);
    world.authority[r] = {0, 0, uint64_t(setup_seq) << 32};
    ++setup_seq;
    return root;
}

mcoin::OutPoint DualWorld::grant(const mcoin::Bytes& coverer,
                                 const mcoin::Bytes& target,
                                 const std::string& letters) {
    OutPoint op = next_setup_outpoint();
    mcoin::Provenance prov{0, uint32_t(setup_seq), 0};
    mcoin::RoleSet rs = mcoin::RoleSet::from_letters(letters);
    ctx.tree.apply_role_change(mcoin::Capacity::M, coverer, target, true, rs,
                               op, prov);

    std::string t = hexstr(target);
    std::string c = hexstr(coverer);
    if (!world.accounts.count(t)) world.accounts[t] = Acct{c, {}, false};
    Acct& a = world.accounts[t];
    std::set<char> granted(letters.begin(), letters.end());
    for (char r : granted) a.roles.insert(r);
    world.grants[opstr(op)] = Grant{t, granted};
    for (char r : granted) world.live[t + "/" + r] = opstr(op);
    if (granted.count('M') && !world.authority.count(t))
        world.authority[t] = {world.depth(t), 0, uint64_t(setup_seq) << 32};
    ++setup_seq;
    return op;
}

mcoin::OutPoint DualWorld::fund(const mcoin::Bytes& owner, uint64_t amount) {
    OutPoint op = next_setup_outpoint();
    ctx.utxo[op] = mcoin::UtxoEntry{amount, owner};
    ctx.utxo_total += amount;
    world.utxo[opstr(op)] = {amount, hexstr(owner)};
    world.utxo_total += amount;
    ++setup_seq;
    return op;
}

void DualWorld::set_policy(const mcoin::Bytes& issuer, uint32_t type,
                           uint32_t param, bool permanent) {
    auto prio = ctx.tree.authority(issuer);
    if (!prio) throw std::logic_error("set_policy: issuer has no authority");
    mcoin::PolicyRecord rec{type, param, permanent, issuer, *prio,
                            mcoin::Provenance{0, uint32_t(setup_seq), 0}};
    ctx.policy.apply(rec);

    PolicyRec orec;
    orec.type = type;
    orec.param = param;
    orec.permanent = permanent;
    orec.issuer = hexstr(issuer);
    orec.rank = {prio->depth, prio->height, prio->intra_block};
    orec.position = {0, setup_seq, 0};
    orec.resolves = (type != 15);
    world.policies.push_back(orec);
    if (permanent) world.permanent.insert({type, orec.issuer});
    ++setup_seq;
}

std::optional<mcoin::OutPoint>
DualWorld::grant_outpoint(const mcoin::Bytes& account, char letter) const {
    mcoin::Role role = mcoin::Role(std::string("MCLUA").find(letter));
    auto g = ctx.tree.grant_for(account, role);
    if (!g || !g->active) return std::nullopt;
    return g->outpoint;
}

void DualWorld::sign(mcoin::Transaction& tx,
                     const std::vector<mcoin::Bytes>& signers) const {
    Hash32 digest = mcoin::tx_digest(tx);
    for (size_t i = 0; i < tx.vin.size() && i < signers.size(); ++i) {
        if (signers[i].empty()) continue;
        const Bytes& priv = keys.at(hexstr(signers[i]));
        tx.vin[i].script_sig =
            mcoin::ScriptSig{scheme.sign(priv, digest), signers[i]};
    }
}

mcoin::TxVerdict DualWorld::step(const mcoin::Transaction& tx, uint64_t height,
                                 uint32_t tx_index, const std::string& where,
                                 size_t* mismatches) {
    ctx.height = height;
    mcoin::TxVerdict ev = mcoin::validate_tx(tx, ctx, tx_index);
    Verdict ov = judge(tx, world, scheme, height, tx_index);

    bool agree = ev.ok == ov.ok;
    if (agree && ev.ok)
        agree = ev.cls.has_coin_transfer == ov.has_coin &&
                ev.cls.has_role_change == ov.has_role &&
                ev.cls.has_policy_change == ov.has_policy &&
                ev.cls.is_management == ov.is_mgmt && ev.fee == ov.fee &&
                ev.created == ov.created;
    if (!agree) {
        std::fprintf(stderr,
                     "[oracle mismatch] %s: engine ok=%d err=%s "
                     "(mgmt=%d coin=%d role=%d pol=%d fee=%llu new=%llu) "
                     "oracle ok=%d why=%s "
                     "(mgmt=%d coin=%d role=%d pol=%d fee=%llu new=%llu)\n",
                     where.c_str(), int(ev.ok), mcoin::err_name(ev.err),
                     int(ev.cls.is_management), int(ev.cls.has_coin_transfer),
                     int(ev.cls.has_role_change), int(ev.cls.has_policy_change),
                     (unsigned long long)ev.fee, (unsigned long long)ev.created,
                     int(ov.ok), ov.why.c_str(), int(ov.is_mgmt),
                     int(ov.has_coin), int(ov.has_role), int(ov.has_policy),
                     (unsigned long long)ov.fee, (unsigned long long)ov.created);
        if (!mismatches) throw std::runtime_error("oracle mismatch: " + where);
        ++*mismatches;
    }
    if (ev.ok && ov.ok) {
        mcoin::apply_tx(tx, ev, ctx, tx_index);
        commit(tx, ov, world, height, tx_index);
    }
    return ev;
}

std::string DualWorld::probe() const {
    if (ctx.tree.size() != world.accounts.size())
        return "account count differs";
    std::string diff;
    ctx.tree.visit([&](const mcoin::AccountNode& n, uint64_t d) {
        if (!diff.empty()) return;
        std::string id = hexstr(n.id);
        auto it = world.accounts.find(id);
        if (it == world.accounts.end()) {
            diff = "missing account " + id;
            return;
        }
        if (letters_of(it->second.roles) != n.roles.letters())
            diff = "roles differ on " + id + ": " +
                   letters_of(it->second.roles) + " vs " + n.roles.letters();
        else if (it->second.frozen != n.frozen)
            diff = "frozen differs on " + id;
        else if (world.depth(id) != d)
            diff = "depth differs on " + id;
    });
    if (!diff.empty()) return diff;

    for (uint32_t t = 0; t < 16; ++t)
        if (ctx.policy.effective(t) != world.effective(t))
            return "policy " + std::to_string(t) + " differs: " +
                   std::to_string(ctx.policy.effective(t)) + " vs " +
                   std::to_string(world.effective(t));

    if (ctx.utxo.size() != world.utxo.size()) return "utxo count differs";
    for (const auto& [op, entry] : ctx.utxo) {
        auto it = world.utxo.find(opstr(op));
        if (it == world.utxo.end()) return "missing utxo " + opstr(op);
        if (it->second.first != entry.amount ||
            it->second.second != hexstr(entry.owner))
            return "utxo differs at " + opstr(op);
    }
    if (ctx.utxo_total != world.utxo_total) return "utxo total differs";
    return "";
}

} // namespace oracle
