// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <mcoin/block.hpp>
#include <mcoin/keys.hpp>
#include <mcoin/validation.hpp>

#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mcoin {

// Everything that pins the identity of a chain before its first block.
// Two nodes agree on a chain if and only if they agree on these bytes.
struct GenesisConfig {
    Bytes root_pubkey;
    std::string scheme_id = "secp256k1";
    Hash32 pow_target{};
    uint64_t initial_reward = 0;
    uint64_t reward_epoch = 1;
    bool require_receiver_role_proof = true;
    std::map<uint32_t, uint32_t> default_numeric_policies;
    // permanent records the root issues inside the genesis transaction
    std::vector<std::pair<uint32_t, uint32_t>> initial_permanent_policies;

    bool operator==(const GenesisConfig&) const = default;
};

// Canonical JSON: sorted keys, lowercase hex, no whitespace. The hash of
// these bytes is the chain id.
std::string genesis_to_json(const GenesisConfig& g);
GenesisConfig genesis_from_json(const std::string& text); // throws BadConfig
Hash32 genesis_hash(const GenesisConfig& g);

Transaction genesis_tx(const GenesisConfig& g);
Block genesis_block(const GenesisConfig& g);

// floor(initial * ((2^32 - decay_q32) / 2^32) ^ (height / epoch)), computed
// exactly in integers so every node lands on the same value.
uint64_t decayed_reward(uint64_t initial, uint64_t decay_q32, uint64_t height,
                        uint64_t epoch);

// Reward for the block at `height` given its parent's effective policy.
uint64_t block_reward(const ValidationContext& parent, uint64_t height);

// Canonical JSON digest of a chain state: account tree, effective policy
// table, quota window, supply accumulators and a hash over the UTXO set.
// Equal states produce identical bytes, so two digests can be compared to
// audit a replay.
std::string context_summary(const ValidationContext& ctx);

struct StoredBlock {
    Block block;
    uint64_t height = 0;
    Hash32 parent{};
};

// A block index with validation-context tracking, fork choice and optional
// on-disk persistence. With a fixed target, cumulative work is proportional
// to height, so fork choice is height-greatest with first-seen tie-break.
class ChainState {
public:
    explicit ChainState(const GenesisConfig& g, bool enforce_quota = true);

    // Persistent chains. init() creates the directory layout and writes the
    // genesis block; open() replays an existing directory. Both take an
    // exclusive lock held for the lifetime of the object.
    static ChainState init(const std::filesystem::path& dir,
                           const GenesisConfig& g, bool enforce_quota = true);
    static ChainState open(const std::filesystem::path& dir,
                           bool enforce_quota = true);

    // Validates against the parent's context. Err::None covers both a newly
    // indexed block and an exact duplicate. The tip moves only when the new
    // block is strictly higher than the current tip.
    Err apply_block(const Block& b);

    // Assembles, signs and mines a block on the current tip. The returned
    // block is not applied. Fails with NoURoleForMiner when the key's
    // account lacks an active U grant, with QuotaViolation when the block
    // would close a deficient window, or with the first error of a bad tx.
    Err mine_block(const std::vector<Transaction>& txs, const KeyPair& miner,
                   uint32_t timestamp, Block& out) const;

    const GenesisConfig& config() const { return config_; }
    Hash32 genesis_id() const { return genesis_hash_; }
    const Hash32& tip() const { return tip_; }
    uint64_t height() const { return blocks_.at(tip_).height; }
    bool has_block(const Hash32& h) const { return blocks_.count(h) != 0; }
    const StoredBlock* find(const Hash32& h) const;
    const std::map<Hash32, StoredBlock>& blocks() const { return blocks_; }

    // Post-state of the given block (by value; contexts are cached with a
    // small replay-backed LRU so off-cache asks cost a chain walk).
    ValidationContext context_for(const Hash32& block_hash) const;
    ValidationContext tip_context() const { return context_for(tip_); }

    // Block hashes from genesis to the given tip (defaults to the tip).
    std::vector<Hash32> chain_to(const Hash32& tip) const;
    std::vector<Hash32> canonical_chain() const { return chain_to(tip_); }

    // Reward owed to the block that would extend the current tip.
    uint64_t next_block_reward() const;

private:
    struct DirLock {
        int fd = -1;
        DirLock() = default;
        explicit DirLock(const std::filesystem::path& p);
        DirLock(DirLock&& o) noexcept : fd(o.fd) { o.fd = -1; }
        DirLock& operator=(DirLock&& o) noexcept;
        ~DirLock();
    };

    void index_genesis();
    void persist(const Block& b);
    void write_manifest() const;
    void cache_context(const Hash32& h, ValidationContext&& ctx) const;

    GenesisConfig config_;
    bool enforce_quota_ = true;
    Hash32 genesis_hash_{}; // hash of the genesis block header
    Hash32 tip_{};
    std::map<Hash32, StoredBlock> blocks_;

    std::filesystem::path dir_; // empty: in-memory only
    DirLock lock_;
    std::unique_ptr<std::ofstream> blocks_out_;

    mutable std::map<Hash32, ValidationContext> contexts_;
    mutable std::deque<Hash32> context_lru_;
};

} // namespace mcoin
