// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <mcoin/accounts.hpp>

namespace mcoin {

const AccountNode& AccountTree::node(const Bytes& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw McoinError(Err::UnknownAccount);
    return it->second;
}

AccountNode& AccountTree::mut_node(const Bytes& id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw McoinError(Err::UnknownAccount);
    return it->second;
}

uint64_t AccountTree::depth(const Bytes& id) const {
    const AccountNode* n = &node(id);
    uint64_t d = 0;
    while (n->parent) {
        n = &node(*n->parent);
        ++d;
    }
    return d;
}

bool AccountTree::covers(const Bytes& coverer, const Bytes& target) const {
    if (!exists(target)) return true;
    const AccountNode* n = &node(target);
    for (;;) {
        if (n->id == coverer) return true;
        if (!n->parent) return false;
        n = &node(*n->parent);
    }
}

bool AccountTree::is_ancestor(const Bytes& a, const Bytes& b) const {
    if (!exists(b) || a == b) return false;
    const AccountNode* n = &node(b);
    while (n->parent) {
        if (*n->parent == a) return true;
        n = &node(*n->parent);
    }
    return false;
}

RoleSet AccountTree::active_roles(const Bytes& id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? RoleSet{} : it->second.roles;
}

std::optional<RoleGrant> AccountTree::grant_for(const Bytes& id, Role r) const {
    auto it = registry_.find(id);
    if (it == registry_.end()) return std::nullopt;
    const RoleGrant& g = it->second[uint8_t(r)];
    if (!g.active && g.outpoint == OutPoint{}) return std::nullopt;
    return g;
}

const AccountTree::GrantSource* AccountTree::grant_at(const OutPoint& o) const {
    auto it = grant_index_.find(o);
    return it == grant_index_.end() ? nullptr : &it->second;
}

std::optional<PriorityKey> AccountTree::authority(const Bytes& id) const {
    auto it = m_authority_.find(id);
    if (it == m_authority_.end()) return std::nullopt;
    return it->second;
}

void AccountTree::register_grants(const Bytes& id, RoleSet roles,
                                  const OutPoint& o, const Provenance& prov) {
    auto& slots = registry_[id];
    for (int i = 0; i < 5; ++i) {
        if (!roles.contains(Role(i))) continue;
        slots[i] = RoleGrant{o, true};
    }
    grant_index_[o] = GrantSource{id, roles};
    // Authority rank is pinned by the earliest M grant and never moves,
    // even if M is later removed and re-granted.
    if (roles.contains(Role::M) && !m_authority_.count(id)) {
        m_authority_[id] =
            PriorityKey{depth(id), prov.height,
                        (uint64_t(prov.tx_index) << 32) | prov.vout_index};
    }
}

void AccountTree::create_root(const Bytes& id, RoleSet roles,
                              const OutPoint& grant, const Provenance& prov) {
    if (!nodes_.empty())
        throw McoinError(Err::BadConfig, "root already exists");
    nodes_[id] = AccountNode{id, std::nullopt, roles, false};
    root_ = id;
    register_grants(id, roles, grant, prov);
}

void AccountTree::apply_role_change(Capacity cap, const Bytes& coverer,
                                    const Bytes& target, bool add,
                                    RoleSet roles, const OutPoint& grant,
                                    const Provenance& prov) {
    if (add) {
        auto it = nodes_.find(target);
        if (it == nodes_.end()) {
            // Fresh accounts attach under whoever covered the change.
            nodes_[target] = AccountNode{target, coverer, roles, false};
            register_grants(target, roles, grant, prov);
            return;
        }
        AccountNode& n = it->second;
        if (n.frozen) {
            // Only an L-covered U grant lifts a freeze.
            if (cap != Capacity::L) throw McoinError(Err::FrozenTarget);
            n.frozen = false;
        }
        if (cap == Capacity::A && !n.roles.contains(Role::U)) {
            // Attendant adoption: the target moves into the coverer's
            // subtree. The caller has already excluded cycles.
            n.parent = coverer;
        }
        n.roles = n.roles | roles;
        register_grants(target, roles, grant, prov);
        return;
    }

    auto it = nodes_.find(target);
    if (it == nodes_.end()) throw McoinError(Err::UnknownTarget);
    AccountNode& n = it->second;
    n.roles = n.roles - roles;
    auto reg = registry_.find(target);
    if (reg != registry_.end()) {
        for (int i = 0; i < 5; ++i)
            if (roles.contains(Role(i))) reg->second[i].active = false;
    }
    if (cap == Capacity::L) {
        // A list-covered removal of U freezes the account outright.
        n.frozen = true;
        n.roles.remove(Role::U);
        if (reg != registry_.end()) reg->second[uint8_t(Role::U)].active = false;
    }
}

std::vector<Bytes> AccountTree::frozen_accounts() const {
    std::vector<Bytes> out;
    for (const auto& [id, n] : nodes_)
        if (n.frozen) out.push_back(id);
    return out;
}

} // namespace mcoin
