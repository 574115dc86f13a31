// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <mcoin/simnet.hpp>

#include <mcoin/nvalue.hpp>
#include <mcoin/rng.hpp>
#include <mcoin/serialize.hpp>

#include <json.hpp>

#include <algorithm>
#include <memory>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <utility>

namespace mcoin {

using nlohmann::json;

const char* behavior_name(Behavior b) {
    switch (b) {
    case Behavior::CompliantMiner: return "compliant_miner";
    case Behavior::RevoltingMiner: return "revolting_miner";
    case Behavior::Administrator: return "administrator";
    case Behavior::Wallet: return "wallet";
    }
    return "?";
}

namespace {

using u128 = unsigned __int128;

[[noreturn]] void bad_scenario() { throw McoinError(Err::BadScenario); }

Behavior behavior_from_name(const std::string& s) {
    if (s == "compliant_miner") return Behavior::CompliantMiner;
    if (s == "revolting_miner") return Behavior::RevoltingMiner;
    if (s == "administrator") return Behavior::Administrator;
    if (s == "wallet") return Behavior::Wallet;
    bad_scenario();
}

const char* action_name(ActionType t) {
    switch (t) {
    case ActionType::RevoltStart: return "revolt_start";
    case ActionType::WithholdStart: return "withhold_start";
    case ActionType::WithholdEnd: return "withhold_end";
    }
    return "?";
}

ActionType action_from_name(const std::string& s) {
    if (s == "revolt_start") return ActionType::RevoltStart;
    if (s == "withhold_start") return ActionType::WithholdStart;
    if (s == "withhold_end") return ActionType::WithholdEnd;
    bad_scenario();
}

uint64_t get_u64(const json& j, const char* key, uint64_t fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_unsigned()) bad_scenario();
    return it->get<uint64_t>();
}

std::string get_str(const json& j, const char* key, const std::string& fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_string()) bad_scenario();
    return it->get<std::string>();
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok) bad_scenario();
    }
}

uint64_t node_key_seed(const NodeSpec& n, size_t index) {
    return n.key_seed != 0 ? n.key_seed : uint64_t(index) + 2;
}

uint64_t emission_period(const NodeSpec& n, uint64_t block_interval) {
    if (n.period != 0) return n.period;
    if (n.behavior == Behavior::Administrator)
        return std::max<uint64_t>(1, block_interval / 3);
    return 0; // wallets are silent unless given a cadence
}

Transaction with_signatures(const SignatureScheme& scheme, Transaction t,
                            const std::vector<const KeyPair*>& signers) {
    Hash32 d = tx_digest(t);
    for (size_t i = 0; i < signers.size() && i < t.vin.size(); ++i)
        if (signers[i])
            t.vin[i].script_sig =
                ScriptSig{scheme.sign(signers[i]->priv, d), signers[i]->pub};
    return t;
}

} // namespace

std::string scenario_to_json(const SimScenario& s) {
    json j;
    j["seed"] = s.seed;
    j["duration"] = s.duration;
    j["block_interval"] = s.block_interval;
    j["latency_base"] = s.latency_base;
    j["latency_jitter"] = s.latency_jitter;
    j["settle_depth"] = s.settle_depth;
    j["genesis"] = json::parse(genesis_to_json(s.genesis));
    json nodes = json::array();
    for (const NodeSpec& n : s.nodes) {
        json e;
        e["id"] = n.id;
        e["behavior"] = behavior_name(n.behavior);
        e["hashpower"] = json::array({n.hash_num, n.hash_den});
        e["key_seed"] = n.key_seed;
        e["period"] = n.period;
        e["amount"] = n.amount;
        e["funding"] = n.funding;
        nodes.push_back(std::move(e));
    }
    j["nodes"] = std::move(nodes);
    json actions = json::array();
    for (const SimAction& a : s.actions) {
        json e;
        e["time"] = a.time;
        e["type"] = action_name(a.type);
        e["node"] = a.node;
        actions.push_back(std::move(e));
    }
    j["actions"] = std::move(actions);
    return j.dump();
}

SimScenario scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception&) {
        bad_scenario();
    }
    if (!j.is_object()) bad_scenario();
    reject_unknown_keys(j, {"seed", "duration", "block_interval",
                            "latency_base", "latency_jitter", "settle_depth",
                            "genesis", "nodes", "actions"});

    SimScenario s;
    s.seed = get_u64(j, "seed", 0);
    s.duration = get_u64(j, "duration", 0);
    s.block_interval = get_u64(j, "block_interval", 600);
    s.latency_base = get_u64(j, "latency_base", 0);
    s.latency_jitter = get_u64(j, "latency_jitter", 0);
    uint64_t depth = get_u64(j, "settle_depth", 12);
    if (depth == 0 || depth > 0xFFFFFFFFull) bad_scenario();
    s.settle_depth = uint32_t(depth);

    if (!j.contains("genesis") || !j["genesis"].is_object()) bad_scenario();
    try {
        s.genesis = genesis_from_json(j["genesis"].dump());
    } catch (const McoinError&) {
        bad_scenario();
    }

    if (!j.contains("nodes") || !j["nodes"].is_array()) bad_scenario();
    for (const json& e : j["nodes"]) {
        if (!e.is_object()) bad_scenario();
        reject_unknown_keys(e, {"id", "behavior", "hashpower", "key_seed",
                                "period", "amount", "funding"});
        NodeSpec n;
        n.id = get_str(e, "id", "");
        n.behavior = behavior_from_name(get_str(e, "behavior", ""));
        if (auto it = e.find("hashpower"); it != e.end()) {
            if (!it->is_array() || it->size() != 2 ||
                !(*it)[0].is_number_unsigned() || !(*it)[1].is_number_unsigned())
                bad_scenario();
            n.hash_num = (*it)[0].get<uint64_t>();
            n.hash_den = (*it)[1].get<uint64_t>();
        }
        n.key_seed = get_u64(e, "key_seed", 0);
        n.period = get_u64(e, "period", 0);
        n.amount = get_u64(e, "amount", 1);
        n.funding = get_u64(e, "funding", 0);
        s.nodes.push_back(std::move(n));
    }

    if (auto it = j.find("actions"); it != j.end()) {
        if (!it->is_array()) bad_scenario();
        for (const json& e : *it) {
            if (!e.is_object()) bad_scenario();
            reject_unknown_keys(e, {"time", "type", "node"});
            SimAction a;
            a.time = get_u64(e, "time", 0);
            a.type = action_from_name(get_str(e, "type", ""));
            a.node = get_str(e, "node", "");
            s.actions.push_back(std::move(a));
        }
    }

    check_scenario(s);
    return s;
}

void check_scenario(const SimScenario& s) {
    if (s.duration == 0 || s.duration > 0xFFFFFFFFull) bad_scenario();
    if (s.block_interval == 0 || s.settle_depth == 0) bad_scenario();
    if (s.nodes.empty()) bad_scenario();

    const SignatureScheme* scheme = nullptr;
    try {
        scheme = &SignatureScheme::get(s.genesis.scheme_id);
    } catch (const McoinError&) {
        bad_scenario();
    }

    size_t admins = 0;
    bool any_power = false;
    std::set<std::string> ids;
    std::set<Bytes> pubs;
    // exact rational sum of the hashpower shares
    uint64_t num = 0, den = 1;
    for (size_t i = 0; i < s.nodes.size(); ++i) {
        const NodeSpec& n = s.nodes[i];
        if (n.id.empty() || !ids.insert(n.id).second) bad_scenario();
        if (n.hash_den == 0) bad_scenario();
        if (n.behavior == Behavior::Wallet && n.amount == 0) bad_scenario();

        KeyPair kp = keypair_from_seed(*scheme, node_key_seed(n, i));
        if (!pubs.insert(kp.pub).second) bad_scenario();
        if (n.behavior == Behavior::Administrator) {
            ++admins;
            if (kp.pub != s.genesis.root_pubkey) bad_scenario();
        }
        if (n.hash_num > 0) any_power = true;

        u128 a = u128(num) * n.hash_den + u128(n.hash_num) * den;
        u128 b = u128(den) * n.hash_den;
        u128 x = a, y = b;
        while (y != 0) { u128 r = x % y; x = y; y = r; }
        if (x == 0) x = 1;
        a /= x;
        b /= x;
        if (a > ~uint64_t(0) || b > ~uint64_t(0)) bad_scenario();
        num = uint64_t(a);
        den = uint64_t(b);
    }
    if (admins != 1) bad_scenario();
    if (!any_power) bad_scenario();
    if (num != 1 || den != 1) bad_scenario();

    for (const SimAction& a : s.actions) {
        if (!a.node.empty() && !ids.count(a.node)) bad_scenario();
        Behavior want = a.type == ActionType::RevoltStart
                            ? Behavior::RevoltingMiner
                            : Behavior::Administrator;
        if (!a.node.empty()) {
            for (const NodeSpec& n : s.nodes)
                if (n.id == a.node && n.behavior != want) bad_scenario();
        } else {
            bool any = false;
            for (const NodeSpec& n : s.nodes) any = any || n.behavior == want;
            if (!any) bad_scenario();
        }
    }
}

namespace {

enum class EvKind : uint8_t { BlockFound, DeliverBlock, DeliverTx, Emit, Action };

struct Ev {
    uint64_t time = 0;
    uint64_t seq = 0;
    EvKind kind = EvKind::BlockFound;
    uint32_t node = 0;   // BlockFound/Emit: actor; Deliver*: recipient
    uint32_t origin = 0; // Deliver*: sender
    uint64_t gen = 0;    // BlockFound staleness guard
    uint32_t action = 0; // Action: index into scenario actions
    std::shared_ptr<const Block> block;
    std::shared_ptr<const Transaction> tx;
};

struct EvAfter {
    bool operator()(const Ev& a, const Ev& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

struct NodeR {
    NodeSpec spec;
    KeyPair key;
    std::unique_ptr<ChainState> chain;
    Rng mine_rng{0};
    Rng link_rng{0};

    std::vector<Transaction> pool; // arrival order
    std::set<Hash32> pool_ids;
    std::map<Hash32, std::vector<std::shared_ptr<const Block>>> orphans;
    std::set<Hash32> known_blocks;

    uint64_t clock_gen = 0;
    bool revolted = false;
    bool withholding = false;
    uint64_t emitted = 0; // lock-time counter keeping emitted txids unique
    std::vector<Transaction> held; // withheld management txs
    Hash32 pending_payment{};
    bool has_pending_payment = false;

    uint64_t found = 0;
    uint64_t quota_skips = 0;
};

// All blocks the observer has ever been shown, accepted or not. Rejected
// blocks (and their descendants) form the non-compliant branches.
struct SeenBlock {
    std::shared_ptr<const Block> block;
    Hash32 parent{};
    uint64_t height = 0;
    bool accepted = false;
    std::string violation; // rejection reason at this block, "" otherwise
    uint32_t miner = 0;
    uint64_t tick = 0;
};

struct EmitInfo {
    uint64_t tick = 0;
    bool management = false;
    bool included = false;
};

struct IncludedTx {
    Hash32 id{};
    uint64_t emit_tick = 0;
    uint64_t height = 0;
    uint64_t tick = 0;
};

constexpr uint64_t kPurposeMine = 1;
constexpr uint64_t kPurposeLink = 2;

class Sim {
public:
    explicit Sim(const SimScenario& s)
        : s_(s), scheme_(SignatureScheme::get(s.genesis.scheme_id)),
          observer_(s.genesis, true) {
        for (size_t i = 0; i < s_.nodes.size(); ++i) {
            auto n = std::make_unique<NodeR>();
            n->spec = s_.nodes[i];
            n->key = keypair_from_seed(scheme_, node_key_seed(n->spec, i));
            bool strict = n->spec.behavior != Behavior::RevoltingMiner;
            n->chain = std::make_unique<ChainState>(s_.genesis, strict);
            n->mine_rng = Rng(s_.seed, uint64_t(i), kPurposeMine);
            n->link_rng = Rng(s_.seed, uint64_t(i), kPurposeLink);
            if (n->spec.behavior == Behavior::Administrator) admin_ = i;
            if (n->spec.behavior == Behavior::Wallet) wallets_.push_back(i);
            if (n->spec.behavior == Behavior::RevoltingMiner)
                revolter_.insert(i);
            nodes_.push_back(std::move(n));
        }
        genesis_hash_ = block_hash(genesis_block(s_.genesis).header);
    }

    SimReport run() {
        bootstrap();
        for (size_t i = 0; i < nodes_.size(); ++i) {
            schedule_clock(i, 0);
            uint64_t p = emission_period(nodes_[i]->spec, s_.block_interval);
            if (p > 0) {
                Ev e;
                e.time = p;
                e.kind = EvKind::Emit;
                e.node = uint32_t(i);
                push(std::move(e));
            }
        }
        for (size_t a = 0; a < s_.actions.size(); ++a) {
            Ev e;
            e.time = s_.actions[a].time;
            e.kind = EvKind::Action;
            e.action = uint32_t(a);
            push(std::move(e));
        }
        while (!q_.empty() && q_.top().time <= s_.duration) {
            Ev ev = q_.top();
            q_.pop();
            dispatch(ev);
        }
        return report();
    }

private:
    // ---- plumbing -------------------------------------------------------

    void push(Ev e) {
        e.seq = seq_++;
        q_.push(std::move(e));
    }

    uint64_t latency(NodeR& sender) {
        uint64_t d = s_.latency_base;
        if (s_.latency_jitter > 0)
            d += sender.link_rng.below(s_.latency_jitter + 1);
        return d;
    }

    void schedule_clock(size_t i, uint64_t now) {
        NodeR& n = *nodes_[i];
        if (n.spec.hash_num == 0) return;
        uint64_t mean =
            uint64_t(u128(s_.block_interval) * n.spec.hash_den / n.spec.hash_num);
        n.clock_gen += 1;
        Ev e;
        e.time = now + n.mine_rng.exp_ticks(mean);
        e.kind = EvKind::BlockFound;
        e.node = uint32_t(i);
        e.gen = n.clock_gen;
        push(std::move(e));
    }

    void broadcast_block(size_t origin, std::shared_ptr<const Block> b,
                         uint64_t now) {
        for (size_t j = 0; j < nodes_.size(); ++j) {
            if (j == origin) continue;
            Ev e;
            e.time = now + latency(*nodes_[origin]);
            e.kind = EvKind::DeliverBlock;
            e.node = uint32_t(j);
            e.origin = uint32_t(origin);
            e.block = b;
            push(std::move(e));
        }
    }

    void broadcast_tx(size_t origin, const Transaction& t, uint64_t now) {
        auto sp = std::make_shared<const Transaction>(t);
        for (size_t j = 0; j < nodes_.size(); ++j) {
            if (j == origin) continue;
            Ev e;
            e.time = now + latency(*nodes_[origin]);
            e.kind = EvKind::DeliverTx;
            e.node = uint32_t(j);
            e.origin = uint32_t(origin);
            e.tx = sp;
            push(std::move(e));
        }
    }

    void pool_add(NodeR& n, const Transaction& t) {
        // A revolted miner refuses role and policy traffic outright; keeping
        // it pooled would only grow an unminable backlog it rescreens on
        // every block attempt.
        if (n.revolted)
            for (const TxOut& o : t.vout)
                if (!is_coin_mode(o.n_value)) return;
        Hash32 id = tx_id(t);
        if (!n.pool_ids.insert(id).second) return;
        n.pool.push_back(t);
    }

    void purge_mgmt_pool(NodeR& n) {
        std::vector<Transaction> keep;
        keep.reserve(n.pool.size());
        for (Transaction& t : n.pool) {
            bool coins_only = true;
            for (const TxOut& o : t.vout)
                coins_only = coins_only && is_coin_mode(o.n_value);
            if (coins_only) {
                keep.push_back(std::move(t));
                continue;
            }
            n.pool_ids.erase(tx_id(t));
        }
        n.pool = std::move(keep);
    }

    void pool_drop_included(NodeR& n, const Block& b) {
        std::set<Hash32> gone;
        for (size_t i = 1; i < b.txs.size(); ++i) gone.insert(tx_id(b.txs[i]));
        if (gone.empty()) return;
        if (n.has_pending_payment && gone.count(n.pending_payment))
            n.has_pending_payment = false;
        std::vector<Transaction> keep;
        keep.reserve(n.pool.size());
        for (Transaction& t : n.pool) {
            Hash32 id = tx_id(t);
            if (gone.count(id)) {
                n.pool_ids.erase(id);
                continue;
            }
            keep.push_back(std::move(t));
        }
        n.pool = std::move(keep);
    }

    void register_emission(const Transaction& t, uint64_t tick, bool mgmt) {
        emits_.emplace(tx_id(t), EmitInfo{tick, mgmt, false});
        ++txs_emitted_;
    }

    // ---- the administrator's transactions -------------------------------

    Transaction noop_policy_tx(NodeR& admin) {
        Transaction t;
        t.vin.push_back(TxIn{root_m_grant_, std::nullopt, 0xFFFFFFFFu});
        t.vout.push_back(TxOut{encode_nvalue(PolicyChange{false, 15, 0}),
                               admin.key.pub});
        t.n_lock_time = uint32_t(admin.emitted++);
        return with_signatures(scheme_, std::move(t), {&admin.key});
    }

    void bootstrap() {
        NodeR& admin = *nodes_[admin_];
        ValidationContext g = admin.chain->tip_context();
        auto grant = g.tree.grant_for(admin.key.pub, Role::M);
        if (!grant) bad_scenario();
        root_m_grant_ = grant->outpoint;

        std::vector<Transaction> txs;
        std::vector<bool> mgmt;

        Transaction tg;
        tg.vin.push_back(TxIn{root_m_grant_, std::nullopt, 0xFFFFFFFFu});
        for (size_t j = 0; j < nodes_.size(); ++j) {
            if (j == admin_) continue;
            tg.vout.push_back(
                TxOut{encode_nvalue(RoleChange{true, RoleSet::from_letters("U")}),
                      nodes_[j]->key.pub});
        }
        if (!tg.vout.empty()) {
            tg.n_lock_time = uint32_t(admin.emitted++);
            txs.push_back(with_signatures(scheme_, std::move(tg), {&admin.key}));
            mgmt.push_back(true);
        }

        if (admin.spec.funding > 0 && !wallets_.empty()) {
            Transaction tf;
            std::vector<const KeyPair*> signers{&admin.key};
            tf.vin.push_back(TxIn{root_m_grant_, std::nullopt, 0xFFFFFFFFu});
            if (s_.genesis.require_receiver_role_proof && !txs.empty()) {
                // Receivers prove their U role out of the grant transaction
                // mined just ahead of this one.
                Hash32 tgid = tx_id(txs[0]);
                for (size_t w : wallets_) {
                    uint32_t idx = 0;
                    for (size_t j = 0; j < nodes_.size(); ++j) {
                        if (j == admin_) continue;
                        if (j == w) break;
                        ++idx;
                    }
                    tf.vin.push_back(TxIn{OutPoint{tgid, idx}, std::nullopt,
                                          0xFFFFFFFFu});
                    signers.push_back(&nodes_[w]->key);
                }
            }
            for (size_t w : wallets_)
                tf.vout.push_back(TxOut{
                    encode_nvalue(CoinTransfer{admin.spec.funding}),
                    nodes_[w]->key.pub});
            tf.n_lock_time = uint32_t(admin.emitted++);
            txs.push_back(with_signatures(scheme_, std::move(tf), signers));
            mgmt.push_back(true);
        }

        txs.push_back(noop_policy_tx(admin));
        mgmt.push_back(true);

        Block b;
        Err e = admin.chain->mine_block(txs, admin.key, 0, b);
        if (e != Err::None) bad_scenario();
        for (size_t i = 0; i < txs.size(); ++i)
            register_emission(txs[i], 0, mgmt[i]);
        accept_own(admin_, std::move(b), 0);
    }

    // ---- event handlers --------------------------------------------------

    void dispatch(const Ev& ev) {
        switch (ev.kind) {
        case EvKind::BlockFound: on_block_found(ev); break;
        case EvKind::DeliverBlock: on_deliver_block(ev); break;
        case EvKind::DeliverTx: on_deliver_tx(ev); break;
        case EvKind::Emit: on_emit(ev); break;
        case EvKind::Action: on_action(ev); break;
        }
    }

    void on_block_found(const Ev& ev) {
        NodeR& n = *nodes_[ev.node];
        if (ev.gen != n.clock_gen) return; // clock was redrawn meanwhile

        // Screen the mempool in arrival order against the would-be block.
        ValidationContext scratch = n.chain->tip_context();
        scratch.height += 1;
        scratch.block_created = 0;
        std::vector<Transaction> cand;
        uint32_t idx = 1;
        for (const Transaction& t : n.pool) {
            TxVerdict v = validate_tx(t, scratch, idx);
            if (!v.ok) continue;
            if (n.revolted && v.cls.is_management) continue;
            apply_tx(t, v, scratch, idx);
            cand.push_back(t);
            ++idx;
        }

        Block b;
        Err e = n.chain->mine_block(cand, n.key, uint32_t(ev.time), b);
        if (e == Err::QuotaViolation) {
            n.quota_skips += 1;
            schedule_clock(ev.node, ev.time);
            return;
        }
        if (e != Err::None) {
            mine_errors_ += 1;
            schedule_clock(ev.node, ev.time);
            return;
        }

        // A rule-diverging miner still behaves compliantly before its revolt:
        // it refuses to publish a block a full-rules node would reject.
        if (revolter_.count(ev.node) && !n.revolted) {
            ValidationContext strict = n.chain->tip_context();
            strict.params.enforce_quota = true;
            uint64_t reward = n.chain->next_block_reward();
            if (validate_block(b, strict, reward).err == Err::QuotaViolation) {
                n.quota_skips += 1;
                schedule_clock(ev.node, ev.time);
                return;
            }
        }

        accept_own(ev.node, std::move(b), ev.time);
        schedule_clock(ev.node, ev.time);
    }

    void accept_own(size_t i, Block b, uint64_t now) {
        NodeR& n = *nodes_[i];
        auto sp = std::make_shared<const Block>(std::move(b));
        Err e = n.chain->apply_block(*sp);
        if (e != Err::None) throw McoinError(Err::IOError);
        n.found += 1;
        n.known_blocks.insert(block_hash(sp->header));
        pool_drop_included(n, *sp);
        observer_ingest(sp, now, uint32_t(i));
        broadcast_block(i, sp, now);
    }

    void on_deliver_block(const Ev& ev) {
        NodeR& n = *nodes_[ev.node];
        blocks_delivered_ += 1;
        if (n.revolted && !revolter_.count(ev.origin)) {
            blocks_ignored_ += 1; // outside the revolting set
            return;
        }
        Hash32 h = block_hash(ev.block->header);
        if (!n.known_blocks.insert(h).second) return;

        Hash32 tip_before = n.chain->tip();
        try_accept(n, ev.block);
        if (n.chain->tip() != tip_before) schedule_clock(ev.node, ev.time);
    }

    void try_accept(NodeR& n, std::shared_ptr<const Block> sp) {
        Err e = n.chain->apply_block(*sp);
        if (e == Err::UnknownParent) {
            n.orphans[sp->header.prev_block_hash].push_back(std::move(sp));
            return;
        }
        if (e != Err::None) {
            node_rejections_ += 1;
            return;
        }
        pool_drop_included(n, *sp);
        // Parent-waiting children, recursively.
        std::vector<Hash32> ready{block_hash(sp->header)};
        while (!ready.empty()) {
            Hash32 h = ready.back();
            ready.pop_back();
            auto it = n.orphans.find(h);
            if (it == n.orphans.end()) continue;
            std::vector<std::shared_ptr<const Block>> kids = std::move(it->second);
            n.orphans.erase(it);
            for (auto& kid : kids) {
                if (n.chain->apply_block(*kid) == Err::None) {
                    pool_drop_included(n, *kid);
                    ready.push_back(block_hash(kid->header));
                } else {
                    node_rejections_ += 1;
                }
            }
        }
    }

    void on_deliver_tx(const Ev& ev) {
        txs_delivered_ += 1;
        pool_add(*nodes_[ev.node], *ev.tx);
    }

    void on_emit(const Ev& ev) {
        NodeR& n = *nodes_[ev.node];
        if (n.spec.behavior == Behavior::Administrator) admin_emit(ev.node, ev.time);
        else if (n.spec.behavior == Behavior::Wallet) wallet_emit(ev.node, ev.time);
        uint64_t p = emission_period(n.spec, s_.block_interval);
        if (p == 0) return;
        Ev next;
        next.time = ev.time + p;
        next.kind = EvKind::Emit;
        next.node = ev.node;
        push(std::move(next));
    }

    void admin_emit(size_t i, uint64_t now) {
        NodeR& admin = *nodes_[i];
        Transaction t = noop_policy_tx(admin);
        if (admin.withholding) {
            admin.held.push_back(std::move(t));
            return;
        }
        register_emission(t, now, true);
        pool_add(admin, t);
        broadcast_tx(i, t, now);
    }

    void wallet_emit(size_t i, uint64_t now) {
        NodeR& w = *nodes_[i];
        if (w.has_pending_payment && w.pool_ids.count(w.pending_payment))
            return; // previous payment still unconfirmed
        ValidationContext ctx = w.chain->tip_context();

        std::optional<OutPoint> coin;
        uint64_t coin_amount = 0;
        for (const auto& [op, entry] : ctx.utxo) {
            if (entry.owner == w.key.pub && entry.amount >= w.spec.amount) {
                coin = op;
                coin_amount = entry.amount;
                break;
            }
        }
        if (!coin) return;
        auto ug = ctx.tree.grant_for(w.key.pub, Role::U);
        if (!ug || !ug->active) return;

        size_t to_node = next_wallet(i);
        const Bytes& to = nodes_[to_node]->key.pub;
        Transaction t;
        std::vector<const KeyPair*> signers{&w.key, &w.key};
        t.vin.push_back(TxIn{*coin, std::nullopt, 0xFFFFFFFFu});
        t.vin.push_back(TxIn{ug->outpoint, std::nullopt, 0xFFFFFFFFu});
        if (ctx.params.require_receiver_role_proof && to != w.key.pub) {
            auto rg = ctx.tree.grant_for(to, Role::U);
            if (!rg || !rg->active) return;
            t.vin.push_back(TxIn{rg->outpoint, std::nullopt, 0xFFFFFFFFu});
            signers.push_back(&nodes_[to_node]->key);
        }
        t.vout.push_back(TxOut{encode_nvalue(CoinTransfer{w.spec.amount}), to});
        if (coin_amount > w.spec.amount)
            t.vout.push_back(TxOut{
                encode_nvalue(CoinTransfer{coin_amount - w.spec.amount}),
                w.key.pub});
        t.n_lock_time = uint32_t(w.emitted++);
        t = with_signatures(scheme_, std::move(t), signers);

        ValidationContext probe = ctx;
        probe.height += 1;
        probe.block_created = 0;
        if (!validate_tx(t, probe, 1).ok) return;

        register_emission(t, now, false);
        w.pending_payment = tx_id(t);
        w.has_pending_payment = true;
        pool_add(w, t);
        broadcast_tx(i, t, now);
    }

    size_t next_wallet(size_t i) const {
        if (wallets_.size() < 2) return i;
        for (size_t k = 0; k < wallets_.size(); ++k)
            if (wallets_[k] == i) return wallets_[(k + 1) % wallets_.size()];
        return i;
    }

    void on_action(const Ev& ev) {
        const SimAction& a = s_.actions[ev.action];
        switch (a.type) {
        case ActionType::RevoltStart:
            for (size_t i : revolter_) {
                if (!a.node.empty() && nodes_[i]->spec.id != a.node) continue;
                nodes_[i]->revolted = true;
                purge_mgmt_pool(*nodes_[i]);
            }
            if (!revolt_tick_) revolt_tick_ = ev.time;
            break;
        case ActionType::WithholdStart:
            for (auto& n : nodes_) {
                if (n->spec.behavior != Behavior::Administrator) continue;
                if (!a.node.empty() && n->spec.id != a.node) continue;
                if (!n->withholding) {
                    n->withholding = true;
                    withheld_.emplace_back(ev.time, s_.duration);
                }
            }
            break;
        case ActionType::WithholdEnd:
            for (size_t i = 0; i < nodes_.size(); ++i) {
                NodeR& n = *nodes_[i];
                if (n.spec.behavior != Behavior::Administrator) continue;
                if (!a.node.empty() && n.spec.id != a.node) continue;
                if (!n.withholding) continue;
                n.withholding = false;
                if (!withheld_.empty()) withheld_.back().second = ev.time;
                std::vector<Transaction> held = std::move(n.held);
                n.held.clear();
                for (Transaction& t : held) {
                    register_emission(t, ev.time, true);
                    pool_add(n, t);
                    broadcast_tx(i, t, ev.time);
                }
            }
            break;
        }
    }

    // ---- the observing full-rules node -----------------------------------

    void observer_ingest(std::shared_ptr<const Block> sp, uint64_t tick,
                         uint32_t miner) {
        Hash32 h = block_hash(sp->header);
        if (seen_.count(h)) return;
        Hash32 parent = sp->header.prev_block_hash;
        uint64_t height = 1;
        if (parent != genesis_hash_) {
            auto it = seen_.find(parent);
            height = it == seen_.end() ? 0 : it->second.height + 1;
        }

        Err e = observer_.apply_block(*sp);
        bool accepted = e == Err::None;
        std::string violation;
        if (!accepted) {
            observer_rejections_ += 1;
            if (e != Err::UnknownParent) violation = err_name(e);
        }

        if (accepted) {
            uint64_t currently = observer_.height();
            if (currently > last_reported_height_) {
                last_reported_height_ = currently;
                timeline_.emplace_back(tick, currently);
            }
            for (size_t i = 1; i < sp->txs.size(); ++i) {
                Hash32 id = tx_id(sp->txs[i]);
                auto it = emits_.find(id);
                if (it == emits_.end() || it->second.included) continue;
                it->second.included = true;
                included_log_.push_back(IncludedTx{id, it->second.tick, height, tick});
            }
        }

        seen_.emplace(h, SeenBlock{std::move(sp), parent, height, accepted,
                                   std::move(violation), miner, tick});
        seen_parents_.insert(parent);
    }

    // ---- report -----------------------------------------------------------

    std::string miner_id(const Hash32& h) const {
        auto it = seen_.find(h);
        if (it == seen_.end()) return "";
        return nodes_[it->second.miner]->spec.id;
    }

    SimReport report() {
        SimReport out;

        // Independent replay of the canonical chain; also the supply audit.
        std::vector<Hash32> canon = observer_.canonical_chain();
        ChainState replay(s_.genesis, true);
        uint64_t reward_sum = 0;
        for (size_t i = 1; i < canon.size(); ++i) {
            const StoredBlock* sb = observer_.find(canon[i]);
            reward_sum += replay.next_block_reward();
            if (replay.apply_block(sb->block) != Err::None)
                throw McoinError(Err::IOError);
            out.canonical_blocks.push_back(sb->block);
        }
        ValidationContext fin = replay.tip_context();

        uint64_t tip_height = canon.size() - 1;
        size_t settled_idx =
            canon.size() > s_.settle_depth ? canon.size() - 1 - s_.settle_depth : 0;

        std::map<Hash32, uint64_t> canon_index;
        for (size_t i = 0; i < canon.size(); ++i) canon_index[canon[i]] = i;

        json by_node_full = json::object();
        json by_node_settled = json::object();
        for (auto& n : nodes_) {
            by_node_full[n->spec.id] = 0;
            by_node_settled[n->spec.id] = 0;
        }
        std::set<std::string> canon_miners;
        for (size_t i = 1; i < canon.size(); ++i) {
            std::string id = miner_id(canon[i]);
            canon_miners.insert(id);
            by_node_full[id] = by_node_full[id].get<uint64_t>() + 1;
            if (i <= settled_idx)
                by_node_settled[id] = by_node_settled[id].get<uint64_t>() + 1;
        }

        json canonical;
        canonical["height"] = tip_height;
        canonical["tip"] = to_hex(canon.back());
        canonical["settled_height"] = settled_idx;
        canonical["settled_tip"] = to_hex(canon[settled_idx]);
        canonical["settle_depth"] = s_.settle_depth;
        canonical["blocks_by_node"] = std::move(by_node_full);
        canonical["blocks_by_node_settled"] = std::move(by_node_settled);

        if (revolt_tick_) {
            json post;
            post["tick"] = *revolt_tick_;
            uint64_t mgmt_settled = 0;
            json post_by_node = json::object();
            for (auto& n : nodes_) post_by_node[n->spec.id] = 0;
            for (size_t i = 1; i <= settled_idx; ++i) {
                const SeenBlock& sb = seen_.at(canon[i]);
                if (sb.block->header.timestamp <= *revolt_tick_) continue;
                std::string id = nodes_[sb.miner]->spec.id;
                post_by_node[id] = post_by_node[id].get<uint64_t>() + 1;
                for (size_t t = 1; t < sb.block->txs.size(); ++t) {
                    auto it = emits_.find(tx_id(sb.block->txs[t]));
                    if (it != emits_.end() && it->second.management)
                        mgmt_settled += 1;
                }
            }
            post["mgmt_settled"] = mgmt_settled;
            post["blocks_by_node_settled"] = std::move(post_by_node);
            canonical["post_revolt"] = std::move(post);
        }

        // Branch inventory. Leaves are grouped by (fork height, violation);
        // violation-free groups shorter than the settle depth are ordinary
        // race losers and only counted.
        struct Branch {
            Hash32 tip{};
            uint64_t tip_height = 0;
            uint64_t root_height = 0;
            std::string violation;
            std::set<std::string> miners;
            uint64_t leaves = 0;
        };
        std::map<std::pair<uint64_t, std::string>, Branch> groups;
        uint64_t stale_tips = 0;
        for (const auto& [h, sb] : seen_) {
            if (seen_parents_.count(h)) continue;
            if (h == canon.back()) continue;
            std::string violation;
            std::set<std::string> miners;
            Hash32 cur = h;
            while (!canon_index.count(cur)) {
                const SeenBlock& x = seen_.at(cur);
                if (!x.violation.empty()) violation = x.violation;
                miners.insert(nodes_[x.miner]->spec.id);
                cur = x.parent;
            }
            uint64_t fork_height = canon_index.at(cur);
            auto key = std::make_pair(fork_height, violation);
            auto [it, fresh] = groups.try_emplace(key);
            Branch& g = it->second;
            g.leaves += 1;
            g.root_height = fork_height;
            g.violation = violation;
            g.miners.insert(miners.begin(), miners.end());
            if (fresh || sb.height > g.tip_height ||
                (sb.height == g.tip_height && to_hex(h) < to_hex(g.tip))) {
                g.tip = h;
                g.tip_height = sb.height;
            }
        }

        json branches = json::array();
        {
            json c;
            c["tip"] = to_hex(canon.back());
            c["tip_height"] = tip_height;
            c["root_height"] = 0;
            c["length"] = tip_height;
            c["classification"] = "compliant";
            c["violation"] = "";
            c["miners"] = json(std::vector<std::string>(canon_miners.begin(),
                                                        canon_miners.end()));
            branches.push_back(std::move(c));
        }
        for (const auto& [key, g] : groups) {
            uint64_t length = g.tip_height - g.root_height;
            if (g.violation.empty() && length < s_.settle_depth) {
                stale_tips += g.leaves;
                continue;
            }
            json e;
            e["tip"] = to_hex(g.tip);
            e["tip_height"] = g.tip_height;
            e["root_height"] = g.root_height;
            e["length"] = length;
            e["classification"] =
                g.violation.empty() ? "compliant" : "non_compliant";
            e["violation"] = g.violation;
            e["miners"] =
                json(std::vector<std::string>(g.miners.begin(), g.miners.end()));
            branches.push_back(std::move(e));
        }

        // Stretches with no canonical growth, well past the expected gap.
        json stalls = json::array();
        uint64_t stall_gap = 3 * s_.block_interval;
        for (size_t i = 0; i + 1 < timeline_.size(); ++i) {
            uint64_t gap = timeline_[i + 1].first - timeline_[i].first;
            if (gap > stall_gap)
                stalls.push_back(json::array({timeline_[i].first,
                                              timeline_[i + 1].first,
                                              timeline_[i].second}));
        }
        if (!timeline_.empty() && s_.duration - timeline_.back().first > stall_gap)
            stalls.push_back(json::array({timeline_.back().first, s_.duration,
                                          timeline_.back().second}));

        json nodes = json::object();
        uint64_t found_total = 0, quota_skips_total = 0;
        for (auto& np : nodes_) {
            NodeR& n = *np;
            json e;
            e["behavior"] = behavior_name(n.spec.behavior);
            e["height"] = n.chain->height();
            e["tip"] = to_hex(n.chain->tip());
            e["revolted"] = n.revolted;
            e["blocks_found"] = n.found;
            e["quota_skips"] = n.quota_skips;
            e["mempool"] = n.pool.size();
            e["emitted"] = n.emitted;
            nodes[n.spec.id] = std::move(e);
            found_total += n.found;
            quota_skips_total += n.quota_skips;
        }

        uint64_t mgmt_emitted = 0, mgmt_included = 0;
        for (const auto& [id, info] : emits_) {
            if (!info.management) continue;
            mgmt_emitted += 1;
            if (info.included) mgmt_included += 1;
        }
        json mgmt;
        mgmt["emitted"] = mgmt_emitted;
        mgmt["included"] = mgmt_included;
        json withheld = json::array();
        for (auto& [a, b] : withheld_) withheld.push_back(json::array({a, b}));
        mgmt["withheld"] = std::move(withheld);
        json mgmt_timeline = json::array();
        for (const IncludedTx& t : included_log_) {
            auto it = emits_.find(t.id);
            if (it == emits_.end() || !it->second.management) continue;
            json e;
            e["tx"] = to_hex(t.id);
            e["emit"] = t.emit_tick;
            e["height"] = t.height;
            e["tick"] = t.tick;
            mgmt_timeline.push_back(std::move(e));
        }
        mgmt["timeline"] = std::move(mgmt_timeline);

        json supply;
        supply["utxo_total"] = fin.utxo_total;
        supply["total_coinbase"] = fin.total_coinbase;
        supply["total_created"] = fin.total_created;
        supply["total_fees"] = fin.total_fees;
        supply["reward_sum"] = reward_sum;

        json events;
        events["mined"] = found_total;
        events["quota_skips"] = quota_skips_total;
        events["mine_errors"] = mine_errors_;
        events["blocks_delivered"] = blocks_delivered_;
        events["blocks_ignored"] = blocks_ignored_;
        events["txs_delivered"] = txs_delivered_;
        events["txs_emitted"] = txs_emitted_;
        events["node_rejections"] = node_rejections_;
        events["observer_rejections"] = observer_rejections_;

        json timeline = json::array();
        for (auto& [t, hgt] : timeline_) timeline.push_back(json::array({t, hgt}));

        json scenario;
        scenario["seed"] = s_.seed;
        scenario["duration"] = s_.duration;
        scenario["block_interval"] = s_.block_interval;
        scenario["latency_base"] = s_.latency_base;
        scenario["latency_jitter"] = s_.latency_jitter;
        scenario["settle_depth"] = s_.settle_depth;
        scenario["nodes"] = nodes_.size();

        json root;
        root["genesis_hash"] = to_hex(observer_.genesis_id());
        root["scenario"] = std::move(scenario);
        root["canonical"] = std::move(canonical);
        root["branches"] = std::move(branches);
        root["stale_tips"] = stale_tips;
        root["height_timeline"] = std::move(timeline);
        root["stalls"] = std::move(stalls);
        root["nodes"] = std::move(nodes);
        root["mgmt"] = std::move(mgmt);
        root["supply"] = std::move(supply);
        root["events"] = std::move(events);
        out.json = root.dump();
        return out;
    }

    SimScenario s_;
    const SignatureScheme& scheme_;
    ChainState observer_;
    Hash32 genesis_hash_{};
    std::vector<std::unique_ptr<NodeR>> nodes_;
    size_t admin_ = 0;
    std::vector<size_t> wallets_;
    std::set<size_t> revolter_;
    OutPoint root_m_grant_{};

    std::priority_queue<Ev, std::vector<Ev>, EvAfter> q_;
    uint64_t seq_ = 0;

    std::map<Hash32, SeenBlock> seen_;
    std::set<Hash32> seen_parents_;
    std::map<Hash32, EmitInfo> emits_;
    std::vector<IncludedTx> included_log_;
    std::vector<std::pair<uint64_t, uint64_t>> timeline_;
    uint64_t last_reported_height_ = 0;
    std::optional<uint64_t> revolt_tick_;
    std::vector<std::pair<uint64_t, uint64_t>> withheld_;

    uint64_t blocks_delivered_ = 0;
    uint64_t blocks_ignored_ = 0;
    uint64_t txs_delivered_ = 0;
    uint64_t txs_emitted_ = 0;
    uint64_t node_rejections_ = 0;
    uint64_t observer_rejections_ = 0;
    uint64_t mine_errors_ = 0;
};

} // namespace

SimReport run_scenario(const SimScenario& s) {
    check_scenario(s);
    Sim sim(s);
    return sim.run();
}

} // namespace mcoin
