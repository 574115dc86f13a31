// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <mcoin/chain.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace mcoin {

// Node behaviors. Miners race for blocks in proportion to hashpower; the
// administrator owns the root account and emits management traffic; wallets
// circulate coin. A revolting miner acts compliant until a revolt_start
// action flips it: from then on it drops management transactions from its
// blocks, stops validating quotas, and ignores blocks from outside the
// revolting set, extending only the revolters' own branch.
enum class Behavior { CompliantMiner, RevoltingMiner, Administrator, Wallet };

const char* behavior_name(Behavior b);

struct NodeSpec {
    std::string id;
    Behavior behavior = Behavior::Wallet;
    uint64_t hash_num = 0; // hashpower share as a fraction; all shares sum to 1
    uint64_t hash_den = 1;
    uint64_t key_seed = 0; // account key; 0 derives one from the node's position
    uint64_t period = 0;   // emission cadence in ticks; 0 picks a behavior default
    uint64_t amount = 1;   // wallet: coin moved per payment
    uint64_t funding = 0;  // administrator: coin created per wallet at bootstrap

    bool operator==(const NodeSpec&) const = default;
};

enum class ActionType { RevoltStart, WithholdStart, WithholdEnd };

// Scheduled state change. An empty node id targets every node the action
// can apply to (revolt_start: revolting miners, withhold_*: administrators).
struct SimAction {
    uint64_t time = 0;
    ActionType type = ActionType::RevoltStart;
    std::string node;

    bool operator==(const SimAction&) const = default;
};

struct SimScenario {
    uint64_t seed = 0;
    uint64_t duration = 0;       // ticks; also the largest usable timestamp
    uint64_t block_interval = 600; // mean ticks between blocks network-wide
    uint64_t latency_base = 0;   // message delay = base + uniform[0, jitter]
    uint64_t latency_jitter = 0;
    uint32_t settle_depth = 12;  // blocks below the tip treated as settled
    GenesisConfig genesis;
    std::vector<NodeSpec> nodes;
    std::vector<SimAction> actions;

    bool operator==(const SimScenario&) const = default;
};

// Declarative scenario file format; keys match the field names above.
// Throws McoinError(BadScenario) on malformed text or violated invariants
// (shares not summing to 1, unknown behavior, administrator key not matching
// the genesis root, duplicate ids or keys).
SimScenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const SimScenario& s);
void check_scenario(const SimScenario& s); // throws McoinError(BadScenario)

struct SimReport {
    // Canonical JSON document (sorted keys, no whitespace); identical bytes
    // for identical (scenario, seed) pairs. Schema documented in README.
    std::string json;
    // The observer's final canonical chain after the genesis block, oldest
    // first, for replay-based audits.
    std::vector<Block> canonical_blocks;
};

// Runs the scenario's event loop to its horizon on one thread and reports.
// Every block a compliant branch carries has passed full validation by the
// observer; non-compliant branches carry their first rejection reason.
SimReport run_scenario(const SimScenario& s);

} // namespace mcoin
