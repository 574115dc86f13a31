// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef MCOIN_ACCOUNTS_HPP
#define MCOIN_ACCOUNTS_HPP

#include <mcoin/bytes.hpp>
#include <mcoin/errors.hpp>
#include <mcoin/roles.hpp>
#include <mcoin/tx.hpp>

#include <array>
#include <map>
#include <optional>
#include <vector>

namespace mcoin {

// Position of a vout in chain order; totally ordered.
struct Provenance {
    uint64_t height = 0;
    uint32_t tx_index = 0;
    uint32_t vout_index = 0;
    auto operator<=>(const Provenance&) const = default;
};

// Authority rank of a manager: tree depth at its earliest M grant, then the
// grant's height, then its intra-block position. Smaller ranks outrank.
struct PriorityKey {
    uint64_t depth = 0;
    uint64_t height = 0;
    uint64_t intra_block = 0; // (tx_index << 32) | vout_index
    auto operator<=>(const PriorityKey&) const = default;
};

// -1, 0 or 1 as a ranks above, equal to, or below b.
inline int compare_authority(const PriorityKey& a, const PriorityKey& b) {
    if (a < b) return -1;
    if (b < a) return 1;
    return 0;
}

struct RoleGrant {
    OutPoint outpoint; // latest accepted grant vout for this (account, role)
    bool active = false;
    bool operator==(const RoleGrant&) const = default;
};

struct AccountNode {
    Bytes id; // the account's public key
    std::optional<Bytes> parent;
    RoleSet roles;
    bool frozen = false;
    bool operator==(const AccountNode&) const = default;
};

// Which validation rule legalised a role change; drives its side effects.
enum class Capacity { Genesis, M, A, L };

// The account hierarchy: a single tree rooted at the genesis account, plus
// the grant registry that maps role vins back to the vouts that created
// them. Mutations assume the change was already judged legal; they only
// enforce structural preconditions (existence, frozen state, acyclicity).
class AccountTree {
public:
    bool exists(const Bytes& id) const { return nodes_.count(id) != 0; }
    const AccountNode& node(const Bytes& id) const; // throws UnknownAccount
    size_t size() const { return nodes_.size(); }
    const Bytes& root_id() const { return root_; }

    // Root depth is 0.
    uint64_t depth(const Bytes& id) const; // throws UnknownAccount

    // True when coverer lies on the path from the root to target, target
    // included. A target not in the tree yet is covered by anyone.
    bool covers(const Bytes& coverer, const Bytes& target) const;

    // True when a is a strict ancestor of b.
    bool is_ancestor(const Bytes& a, const Bytes& b) const;

    // Roles the account may currently exercise. Empty set for unknown ids.
    RoleSet active_roles(const Bytes& id) const;

    std::optional<RoleGrant> grant_for(const Bytes& id, Role r) const;

    // Reverse index: grant vout -> (account, roles granted there).
    struct GrantSource {
        Bytes account;
        RoleSet granted;
        bool operator==(const GrantSource&) const = default;
    };
    const GrantSource* grant_at(const OutPoint& o) const;

    // Fixed at the account's earliest M grant; nullopt before any.
    std::optional<PriorityKey> authority(const Bytes& id) const;

    // Creates the root account; only valid on an empty tree.
    void create_root(const Bytes& id, RoleSet roles, const OutPoint& grant,
                     const Provenance& prov);

    // Applies one accepted role-change vout. add=true grants (and creates,
    // re-parents or unfreezes per capacity), add=false removes (and freezes
    // under L capacity). Throws UnknownTarget / FrozenTarget when the
    // structural preconditions fail.
    void apply_role_change(Capacity cap, const Bytes& coverer,
                           const Bytes& target, bool add, RoleSet roles,
                           const OutPoint& grant, const Provenance& prov);

    std::vector<Bytes> frozen_accounts() const;

    // Deterministic walk, parents before children, siblings by id.
    template <typename F> void visit(F&& f) const {
        for (const auto& [id, node] : nodes_) f(node, depth(id));
    }

    bool operator==(const AccountTree&) const = default;

private:
    AccountNode& mut_node(const Bytes& id);
    void register_grants(const Bytes& id, RoleSet roles, const OutPoint& o,
                         const Provenance& prov);

    std::map<Bytes, AccountNode> nodes_;
    // registry_[id][role] is the authoritative grant for that pair.
    std::map<Bytes, std::array<RoleGrant, 5>> registry_;
    std::map<OutPoint, GrantSource> grant_index_;
    std::map<Bytes, PriorityKey> m_authority_;
    Bytes root_;
};

} // namespace mcoin

#endif // MCOIN_ACCOUNTS_HPP
