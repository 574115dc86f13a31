// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <mcoin/chain.hpp>

#include <mcoin/hash.hpp>
#include <mcoin/keys.hpp>
#include <mcoin/merkle.hpp>
#include <mcoin/nvalue.hpp>
#include <mcoin/serialize.hpp>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>

namespace mcoin {

namespace {

using json = nlohmann::json;
using boost::multiprecision::cpp_int;

constexpr size_t kContextCacheCap = 8;

[[noreturn]] void bad_config(const std::string& what) {
    throw McoinError(Err::BadConfig, "genesis config: " + what);
}

Hash32 hash32_from_hex_checked(const std::string& s, const char* field) {
    Bytes raw;
    if (!try_from_hex(s, raw) || raw.size() != 32)
        bad_config(std::string(field) + " must be 32 bytes of hex");
    return hash_from_bytes(raw);
}

} // namespace

std::string genesis_to_json(const GenesisConfig& g) {
    json defaults = json::object();
    for (const auto& [t, p] : g.default_numeric_policies)
        defaults[std::to_string(t)] = p;
    json perms = json::array();
    for (const auto& [t, p] : g.initial_permanent_policies)
        perms.push_back(json::array({t, p}));
    json j = {
        {"default_numeric_policies", defaults},
        {"initial_permanent_policies", perms},
        {"initial_reward", g.initial_reward},
        {"pow_target", to_hex(g.pow_target)},
        {"require_receiver_role_proof", g.require_receiver_role_proof},
        {"reward_epoch", g.reward_epoch},
        {"root_pubkey", to_hex(g.root_pubkey)},
        {"scheme_id", g.scheme_id},
    };
    return j.dump();
}

GenesisConfig genesis_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        bad_config(e.what());
    }
    if (!j.is_object()) bad_config("top level must be an object");
    static const std::set<std::string> allowed = {
        "default_numeric_policies", "initial_permanent_policies",
        "initial_reward",           "pow_target",
        "require_receiver_role_proof", "reward_epoch",
        "root_pubkey",              "scheme_id"};
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) bad_config("unknown key \"" + k + "\"");

    GenesisConfig g;
    try {
        if (!try_from_hex(j.at("root_pubkey").get<std::string>(),
                          g.root_pubkey) ||
            g.root_pubkey.size() != 33)
            bad_config("root_pubkey must be 33 bytes of hex");
        g.pow_target = hash32_from_hex_checked(
            j.at("pow_target").get<std::string>(), "pow_target");
        g.initial_reward = j.at("initial_reward").get<uint64_t>();
        g.reward_epoch = j.at("reward_epoch").get<uint64_t>();
        if (j.contains("scheme_id"))
            g.scheme_id = j["scheme_id"].get<std::string>();
        if (j.contains("require_receiver_role_proof"))
            g.require_receiver_role_proof =
                j["require_receiver_role_proof"].get<bool>();
        if (j.contains("default_numeric_policies")) {
            for (const auto& [k, v] : j["default_numeric_policies"].items()) {
                size_t pos = 0;
                unsigned long t = std::stoul(k, &pos);
                if (pos != k.size() || t >= kPolicyTypeCount ||
                    policy_type_is_binary(uint32_t(t)) || t == 15)
                    bad_config("default for non-numeric policy type " + k);
                g.default_numeric_policies[uint32_t(t)] = v.get<uint32_t>();
            }
        }
        if (j.contains("initial_permanent_policies")) {
            for (const auto& e : j["initial_permanent_policies"]) {
                if (!e.is_array() || e.size() != 2)
                    bad_config("permanent record must be [type, param]");
                g.initial_permanent_policies.emplace_back(
                    e[0].get<uint32_t>(), e[1].get<uint32_t>());
            }
        }
    } catch (const json::exception& e) {
        bad_config(e.what());
    } catch (const std::exception&) {
        bad_config("malformed numeric field");
    }
    if (g.reward_epoch == 0) bad_config("reward_epoch must be at least 1");
    return g;
}

Hash32 genesis_hash(const GenesisConfig& g) {
    std::string s = genesis_to_json(g);
    return dsha256(Bytes(s.begin(), s.end()));
}

Transaction genesis_tx(const GenesisConfig& g) {
    Transaction t;
    t.vin.push_back(TxIn{OutPoint::null(), std::nullopt, 0xFFFFFFFF});
    t.vout.push_back(
        TxOut{encode_nvalue(RoleChange{true, RoleSet::all()}), g.root_pubkey});
    for (const auto& [pt, pp] : g.initial_permanent_policies)
        t.vout.push_back(
            TxOut{encode_nvalue(PolicyChange{true, pt, pp}), g.root_pubkey});
    t.n_lock_time = 0;
    return t;
}

Block genesis_block(const GenesisConfig& g) {
    Block b;
    b.txs.push_back(genesis_tx(g));
    b.header.prev_block_hash = Hash32{};
    b.header.merkle_root = merkle_root({tx_id(b.txs[0])});
    b.header.timestamp = 0;
    b.header.target = g.pow_target;
    b.header.nonce = 0;
    return b;
}

uint64_t decayed_reward(uint64_t initial, uint64_t decay_q32, uint64_t height,
                        uint64_t epoch) {
    if (epoch == 0) epoch = 1;
    uint64_t k = height / epoch;
    if (k == 0 || decay_q32 == 0 || initial == 0)
        return decay_q32 >= (uint64_t(1) << 32) ? 0 : initial;
    if (decay_q32 >= (uint64_t(1) << 32)) return 0;
    cpp_int factor = 1;
    cpp_int base = (uint64_t(1) << 32) - decay_q32;
    uint64_t e = k;
    while (e > 0) {
        if (e & 1) factor *= base;
        e >>= 1;
        if (e) base *= base;
    }
    cpp_int r = (cpp_int(initial) * factor) >> unsigned(32 * k);
    return r.convert_to<uint64_t>();
}

uint64_t block_reward(const ValidationContext& parent, uint64_t height) {
    if (parent.policy.effective(7) == 0) {
        uint64_t manual = parent.policy.effective(8);
        uint64_t floor = parent.policy.effective(9);
        return std::max(manual, floor);
    }
    return decayed_reward(parent.params.initial_reward,
                          parent.policy.effective(10), height,
                          parent.params.reward_epoch);
}

ChainState::DirLock::DirLock(const std::filesystem::path& p) {
    fd = ::open(p.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd < 0) throw McoinError(Err::IOError, "cannot open " + p.string());
    if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd);
        fd = -1;
        throw McoinError(Err::IOError,
                         "chain directory is locked: " + p.string());
    }
}

ChainState::DirLock& ChainState::DirLock::operator=(DirLock&& o) noexcept {
    if (this != &o) {
        if (fd >= 0) ::close(fd);
        fd = o.fd;
        o.fd = -1;
    }
    return *this;
}

ChainState::DirLock::~DirLock() {
    if (fd >= 0) ::close(fd);
}

ChainState::ChainState(const GenesisConfig& g, bool enforce_quota)
    : config_(g), enforce_quota_(enforce_quota) {
    if (config_.root_pubkey.size() != 33)
        bad_config("root_pubkey must be 33 bytes");
    if (config_.reward_epoch == 0) bad_config("reward_epoch must be at least 1");
    try {
        SignatureScheme::get(config_.scheme_id);
    } catch (const McoinError&) {
        bad_config("unknown scheme \"" + config_.scheme_id + "\"");
    }
    index_genesis();
}

void ChainState::index_genesis() {
    Block gb = genesis_block(config_);
    genesis_hash_ = block_hash(gb.header);
    Hash32 gid = tx_id(gb.txs[0]);

    ValidationContext ctx;
    ctx.params.scheme_id = config_.scheme_id;
    ctx.params.pow_target = config_.pow_target;
    ctx.params.initial_reward = config_.initial_reward;
    ctx.params.reward_epoch = config_.reward_epoch;
    ctx.params.require_receiver_role_proof =
        config_.require_receiver_role_proof;
    ctx.params.enforce_quota = enforce_quota_;
    ctx.policy = PolicyState(config_.default_numeric_policies);
    ctx.height = 0;
    ctx.tree.create_root(config_.root_pubkey, RoleSet::all(),
                         OutPoint{gid, 0}, Provenance{0, 0, 0});
    PriorityKey root_rank = *ctx.tree.authority(config_.root_pubkey);
    uint32_t vout_index = 1;
    for (const auto& [pt, pp] : config_.initial_permanent_policies) {
        PolicyRecord rec{pt, pp, true, config_.root_pubkey, root_rank,
                         Provenance{0, 0, vout_index}};
        Err e = ctx.policy.check(rec);
        if (e != Err::None)
            bad_config(std::string("permanent record rejected: ") +
                       err_name(e));
        ctx.policy.apply(rec);
        ++vout_index;
    }
    ctx.seen_txids.insert(gid);

    blocks_.clear();
    blocks_[genesis_hash_] = StoredBlock{std::move(gb), 0, Hash32{}};
    tip_ = genesis_hash_;
    contexts_.clear();
    context_lru_.clear();
    contexts_.emplace(genesis_hash_, std::move(ctx));
}

const StoredBlock* ChainState::find(const Hash32& h) const {
    auto it = blocks_.find(h);
    return it == blocks_.end() ? nullptr : &it->second;
}

void ChainState::cache_context(const Hash32& h,
                               ValidationContext&& ctx) const {
    if (contexts_.count(h)) return;
    contexts_.emplace(h, std::move(ctx));
    context_lru_.push_back(h);
    while (context_lru_.size() > kContextCacheCap) {
        Hash32 victim = context_lru_.front();
        context_lru_.pop_front();
        if (victim != genesis_hash_) contexts_.erase(victim);
    }
}

ValidationContext ChainState::context_for(const Hash32& block_hash) const {
    if (auto it = contexts_.find(block_hash); it != contexts_.end())
        return it->second;
    auto bit = blocks_.find(block_hash);
    if (bit == blocks_.end())
        throw McoinError(Err::UnknownParent, "no such block indexed");

    // Walk back to the nearest cached ancestor, then replay forward.
    std::vector<const StoredBlock*> path;
    Hash32 cursor = block_hash;
    while (!contexts_.count(cursor)) {
        const StoredBlock& sb = blocks_.at(cursor);
        path.push_back(&sb);
        cursor = sb.parent;
    }
    ValidationContext ctx = contexts_.at(cursor);
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        uint64_t reward = block_reward(ctx, (*it)->height);
        BlockResult r = validate_block((*it)->block, ctx, reward);
        if (!r.ok())
            throw McoinError(Err::IOError,
                             std::string("indexed block fails replay: ") +
                                 err_name(r.err));
    }
    ValidationContext out = ctx;
    cache_context(block_hash, std::move(ctx));
    return out;
}

Err ChainState::apply_block(const Block& b) {
    Hash32 h = block_hash(b.header);
    if (blocks_.count(h)) return Err::None; // duplicate, nothing to do
    auto pit = blocks_.find(b.header.prev_block_hash);
    if (pit == blocks_.end()) return Err::UnknownParent;
    uint64_t height = pit->second.height + 1;

    ValidationContext ctx = context_for(b.header.prev_block_hash);
    uint64_t reward = block_reward(ctx, height);
    BlockResult r = validate_block(b, ctx, reward);
    if (!r.ok()) return r.err;

    blocks_[h] = StoredBlock{b, height, b.header.prev_block_hash};
    cache_context(h, std::move(ctx));
    persist(b);
    if (height > blocks_.at(tip_).height) tip_ = h; // first seen keeps ties
    if (!dir_.empty()) write_manifest();
    return Err::None;
}

Err ChainState::mine_block(const std::vector<Transaction>& txs,
                           const KeyPair& miner, uint32_t timestamp,
                           Block& out) const {
    const StoredBlock& tipb = blocks_.at(tip_);
    uint64_t height = tipb.height + 1;
    ValidationContext ctx = context_for(tip_);
    uint64_t reward = block_reward(ctx, height);

    if (!ctx.tree.exists(miner.pub)) return Err::NoURoleForMiner;
    if (ctx.tree.node(miner.pub).frozen) return Err::NoURoleForMiner;
    auto grant = ctx.tree.grant_for(miner.pub, Role::U);
    if (!grant || !grant->active) return Err::NoURoleForMiner;

    // Thread the candidate transactions to learn the fees they pay.
    ValidationContext scratch = ctx;
    scratch.height = height;
    scratch.block_created = 0;
    uint64_t fees = 0;
    uint32_t index = 1;
    for (const Transaction& tx : txs) {
        TxVerdict v = validate_tx(tx, scratch, index);
        if (!v.ok) return v.err;
        apply_tx(tx, v, scratch, index);
        fees += v.fee;
        ++index;
    }

    Transaction cb;
    cb.vin.push_back(TxIn{OutPoint::null(), std::nullopt, 0xFFFFFFFF});
    cb.vin.push_back(TxIn{grant->outpoint, std::nullopt, 0xFFFFFFFF});
    cb.vout.push_back(TxOut{reward + fees, miner.pub});
    cb.n_lock_time = uint32_t(height);
    const SignatureScheme& scheme = SignatureScheme::get(config_.scheme_id);
    Hash32 digest = tx_digest(cb);
    cb.vin[1].script_sig =
        ScriptSig{scheme.sign(miner.priv, digest), miner.pub};

    Block b;
    b.txs.reserve(txs.size() + 1);
    b.txs.push_back(std::move(cb));
    for (const Transaction& tx : txs) b.txs.push_back(tx);
    std::vector<Hash32> ids;
    ids.reserve(b.txs.size());
    for (const Transaction& tx : b.txs) ids.push_back(tx_id(tx));
    b.header.prev_block_hash = tip_;
    b.header.merkle_root = merkle_root(ids);
    b.header.timestamp = timestamp;
    b.header.target = config_.pow_target;
    for (uint64_t nonce = 0;; ++nonce) {
        b.header.nonce = nonce;
        if (meets_target(block_hash(b.header), b.header.target)) break;
    }

    // The block must pass the same gate apply_block will run; this is where
    // a deficient quota window surfaces and refuses the mine.
    ValidationContext check = ctx;
    BlockResult r = validate_block(b, check, reward);
    if (!r.ok()) return r.err;
    out = std::move(b);
    return Err::None;
}

std::vector<Hash32> ChainState::chain_to(const Hash32& tip) const {
    std::vector<Hash32> out;
    Hash32 cursor = tip;
    while (true) {
        const StoredBlock* sb = find(cursor);
        if (!sb) throw McoinError(Err::UnknownParent, "no such block indexed");
        out.push_back(cursor);
        if (sb->height == 0) break;
        cursor = sb->parent;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

uint64_t ChainState::next_block_reward() const {
    ValidationContext ctx = context_for(tip_);
    return block_reward(ctx, blocks_.at(tip_).height + 1);
}

namespace {

void write_record(std::ostream& os, const Bytes& raw) {
    uint32_t len = uint32_t(raw.size());
    uint8_t hdr[4] = {uint8_t(len), uint8_t(len >> 8), uint8_t(len >> 16),
                      uint8_t(len >> 24)};
    os.write(reinterpret_cast<const char*>(hdr), 4);
    os.write(reinterpret_cast<const char*>(raw.data()),
             std::streamsize(raw.size()));
}

bool read_record(std::istream& is, Bytes& out) {
    uint8_t hdr[4];
    if (!is.read(reinterpret_cast<char*>(hdr), 4)) return false;
    uint32_t len = uint32_t(hdr[0]) | uint32_t(hdr[1]) << 8 |
                   uint32_t(hdr[2]) << 16 | uint32_t(hdr[3]) << 24;
    out.resize(len);
    if (!is.read(reinterpret_cast<char*>(out.data()), len))
        throw McoinError(Err::IOError, "truncated block record");
    return true;
}

} // namespace

void ChainState::persist(const Block& b) {
    if (!blocks_out_) return;
    write_record(*blocks_out_, serialize_block(b));
    blocks_out_->flush();
    if (!*blocks_out_)
        throw McoinError(Err::IOError, "cannot append to blocks.dat");
}

void ChainState::write_manifest() const {
    if (dir_.empty()) return;
    json j = {
        {"genesis_hash", to_hex(genesis_hash_)},
        {"height", blocks_.at(tip_).height},
        {"tip_hash", to_hex(tip_)},
    };
    std::filesystem::path tmp = dir_ / "manifest.json.tmp";
    std::ofstream os(tmp, std::ios::trunc);
    os << j.dump() << "\n";
    os.close();
    if (!os) throw McoinError(Err::IOError, "cannot write manifest");
    std::filesystem::rename(tmp, dir_ / "manifest.json");
}

ChainState ChainState::init(const std::filesystem::path& dir,
                            const GenesisConfig& g, bool enforce_quota) {
    std::filesystem::create_directories(dir);
    if (std::filesystem::exists(dir / "genesis.json"))
        throw McoinError(Err::IOError,
                         "chain directory already initialized: " +
                             dir.string());
    DirLock lock(dir / ".lock");
    ChainState st(g, enforce_quota);
    {
        std::ofstream os(dir / "genesis.json", std::ios::trunc);
        os << genesis_to_json(g) << "\n";
        if (!os) throw McoinError(Err::IOError, "cannot write genesis.json");
    }
    {
        std::ofstream os(dir / "blocks.dat",
                         std::ios::trunc | std::ios::binary);
        write_record(os, serialize_block(st.blocks_.at(st.genesis_hash_).block));
        if (!os) throw McoinError(Err::IOError, "cannot write blocks.dat");
    }
    st.dir_ = dir;
    st.lock_ = std::move(lock);
    st.blocks_out_ = std::make_unique<std::ofstream>(
        dir / "blocks.dat", std::ios::app | std::ios::binary);
    st.write_manifest();
    return st;
}

ChainState ChainState::open(const std::filesystem::path& dir,
                            bool enforce_quota) {
    if (!std::filesystem::exists(dir / "genesis.json"))
        throw McoinError(Err::IOError,
                         "not a chain directory: " + dir.string());
    DirLock lock(dir / ".lock");
    std::ifstream cfg(dir / "genesis.json");
    std::string text((std::istreambuf_iterator<char>(cfg)),
                     std::istreambuf_iterator<char>());
    ChainState st(genesis_from_json(text), enforce_quota);

    std::ifstream blocks(dir / "blocks.dat", std::ios::binary);
    if (!blocks) throw McoinError(Err::IOError, "cannot read blocks.dat");
    Bytes raw;
    bool first = true;
    while (read_record(blocks, raw)) {
        Block b = deserialize_block(raw);
        if (first) {
            if (block_hash(b.header) != st.genesis_hash_)
                throw McoinError(Err::IOError,
                                 "stored genesis does not match config");
            first = false;
            continue;
        }
        Err e = st.apply_block(b);
        if (e != Err::None)
            throw McoinError(Err::IOError,
                             std::string("corrupt chain record: ") +
                                 err_name(e));
    }
    if (first) throw McoinError(Err::IOError, "blocks.dat has no genesis");
    st.dir_ = dir;
    st.lock_ = std::move(lock);
    st.blocks_out_ = std::make_unique<std::ofstream>(
        dir / "blocks.dat", std::ios::app | std::ios::binary);
    st.write_manifest();
    return st;
}

std::string context_summary(const ValidationContext& ctx) {
    json accounts = json::array();
    ctx.tree.visit([&](const AccountNode& n, uint64_t depth) {
        json a;
        a["id"] = to_hex(n.id);
        a["parent"] = n.parent ? json(to_hex(*n.parent)) : json(nullptr);
        a["depth"] = depth;
        a["roles"] = n.roles.letters();
        a["active"] = ctx.tree.active_roles(n.id).letters();
        a["frozen"] = n.frozen;
        accounts.push_back(std::move(a));
    });

    json policy = json::array();
    for (uint32_t t = 0; t < kPolicyTypeCount; ++t)
        policy.push_back(ctx.policy.effective(t));

    // Order-independent digest: the map iterates in OutPoint order.
    std::string utxo_feed;
    for (const auto& [op, entry] : ctx.utxo) {
        utxo_feed += to_hex(op.tx_hash);
        utxo_feed += ':';
        utxo_feed += std::to_string(op.index);
        utxo_feed += ':';
        utxo_feed += std::to_string(entry.amount);
        utxo_feed += ':';
        utxo_feed += to_hex(entry.owner);
        utxo_feed += ';';
    }
    Hash32 utxo_digest = dsha256(
        reinterpret_cast<const uint8_t*>(utxo_feed.data()), utxo_feed.size());

    json quota;
    quota["anchor"] = ctx.quota_anchor;
    quota["window"] = ctx.quota_n;
    quota["required"] = ctx.quota_k;
    quota["mgmt_in_window"] = ctx.window_mgmt;
    quota["policy_mgmt_in_window"] = ctx.window_policy_mgmt;

    json supply;
    supply["utxo_total"] = ctx.utxo_total;
    supply["total_coinbase"] = ctx.total_coinbase;
    supply["total_created"] = ctx.total_created;
    supply["total_fees"] = ctx.total_fees;

    json root;
    root["height"] = ctx.height;
    root["accounts"] = std::move(accounts);
    root["policy"] = std::move(policy);
    root["policy_records"] = ctx.policy.accepted_count();
    root["quota"] = std::move(quota);
    root["supply"] = std::move(supply);
    root["utxo_count"] = ctx.utxo.size();
    root["utxo_digest"] = to_hex(utxo_digest);
    return root.dump();
}

} // namespace mcoin
