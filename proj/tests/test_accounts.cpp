#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mcoin/accounts.hpp>

#include "testutil.hpp"

using namespace mcoin;

namespace {

Bytes aid(uint8_t tag) {
    Bytes id(33, 0);
    id[0] = 0x02;
    id[1] = tag;
    return id;
}

OutPoint op(uint8_t tag, uint32_t idx = 0) {
    OutPoint o;
    o.tx_hash[0] = tag;
    o.tx_hash[1] = 0x77;
    o.index = idx;
    return o;
}

AccountTree base_tree() {
    AccountTree t;
    t.create_root(aid(0), RoleSet::all(), op(0), {0, 0, 0});
    return t;
}

} // namespace

TEST_CASE("root creation and basic queries") {
    AccountTree t = base_tree();
    CHECK(t.size() == 1);
    CHECK(t.root_id() == aid(0));
    CHECK(t.depth(aid(0)) == 0);
    CHECK(t.active_roles(aid(0)) == RoleSet::all());
    CHECK(t.covers(aid(0), aid(0)));
    CHECK_FALSE(t.is_ancestor(aid(0), aid(0)));
    CHECK(t.authority(aid(0)).has_value());
    CHECK(*t.authority(aid(0)) == PriorityKey{0, 0, 0});
    CHECK_THROWS_AS(t.depth(aid(9)), McoinError);
    // second root refused
    CHECK_THROWS_AS(t.create_root(aid(1), RoleSet::all(), op(1), {0, 0, 0}),
                    McoinError);
}

TEST_CASE("grants attach fresh accounts under the coverer") {
    AccountTree t = base_tree();
    t.apply_role_change(Capacity::M, aid(0), aid(1), true,
                        RoleSet{Role::M, Role::U}, op(1), {1, 0, 0});
    t.apply_role_change(Capacity::M, aid(1), aid(2), true, RoleSet{Role::U},
                        op(2), {2, 0, 0});
    CHECK(t.depth(aid(1)) == 1);
    CHECK(t.depth(aid(2)) == 2);
    CHECK(*t.node(aid(2)).parent == aid(1));
    CHECK(t.covers(aid(0), aid(2)));
    CHECK(t.covers(aid(1), aid(2)));
    CHECK_FALSE(t.covers(aid(2), aid(1)));
    CHECK(t.is_ancestor(aid(0), aid(2)));
    CHECK_FALSE(t.is_ancestor(aid(2), aid(0)));
    // unknown accounts are covered by anyone (they can be created)
    CHECK(t.covers(aid(2), aid(9)));

    // authority pinned at first M grant, depth measured then
    CHECK(*t.authority(aid(1)) == PriorityKey{1, 1, 0});
    CHECK_FALSE(t.authority(aid(2)).has_value());
}

TEST_CASE("latest grant is authoritative") {
    AccountTree t = base_tree();
    t.apply_role_change(Capacity::M, aid(0), aid(1), true, RoleSet{Role::U},
                        op(1), {1, 0, 0});
    auto g1 = t.grant_for(aid(1), Role::U);
    REQUIRE(g1.has_value());
    CHECK(g1->outpoint == op(1));
    CHECK(g1->active);

    // a re-grant moves the authoritative outpoint
    t.apply_role_change(Capacity::M, aid(0), aid(1), true, RoleSet{Role::U},
                        op(2), {2, 0, 0});
    auto g2 = t.grant_for(aid(1), Role::U);
    REQUIRE(g2.has_value());
    CHECK(g2->outpoint == op(2));

    // the old outpoint still resolves, but to a stale grant
    const auto* src = t.grant_at(op(1));
    REQUIRE(src != nullptr);
    CHECK(src->account == aid(1));
    CHECK(src->granted == RoleSet{Role::U});

    // removal deactivates
    t.apply_role_change(Capacity::M, aid(0), aid(1), false, RoleSet{Role::U},
                        op(3), {3, 0, 0});
    auto g3 = t.grant_for(aid(1), Role::U);
    REQUIRE(g3.has_value());
    CHECK_FALSE(g3->active);
    CHECK(t.active_roles(aid(1)).empty());
}

TEST_CASE("L-covered removal freezes, L-covered grant restores") {
    AccountTree t = base_tree();
    t.apply_role_change(Capacity::M, aid(0), aid(1), true, RoleSet{Role::L},
                        op(1), {1, 0, 0});
    t.apply_role_change(Capacity::M, aid(0), aid(2), true,
                        RoleSet{Role::U, Role::C}, op(2), {1, 1, 0});

    t.apply_role_change(Capacity::L, aid(1), aid(2), false, RoleSet{Role::U},
                        op(3), {2, 0, 0});
    CHECK(t.node(aid(2)).frozen);
    CHECK_FALSE(t.active_roles(aid(2)).contains(Role::U));
    // other roles survive a freeze
    CHECK(t.active_roles(aid(2)).contains(Role::C));
    CHECK(t.frozen_accounts() == std::vector<Bytes>{aid(2)});

    // M/A capacity cannot lift the freeze
    CHECK_THROWS_AS(t.apply_role_change(Capacity::M, aid(0), aid(2), true,
                                        RoleSet{Role::U}, op(4), {3, 0, 0}),
                    McoinError);
    CHECK_THROWS_AS(t.apply_role_change(Capacity::A, aid(0), aid(2), true,
                                        RoleSet{Role::U}, op(4), {3, 0, 0}),
                    McoinError);
    CHECK(t.node(aid(2)).frozen);

    t.apply_role_change(Capacity::L, aid(1), aid(2), true, RoleSet{Role::U},
                        op(5), {4, 0, 0});
    CHECK_FALSE(t.node(aid(2)).frozen);
    CHECK(t.active_roles(aid(2)).contains(Role::U));
    CHECK(t.frozen_accounts().empty());
}

TEST_CASE("M-covered removal of U does not freeze") {
    AccountTree t = base_tree();
    t.apply_role_change(Capacity::M, aid(0), aid(1), true, RoleSet{Role::U},
                        op(1), {1, 0, 0});
    t.apply_role_change(Capacity::M, aid(0), aid(1), false, RoleSet{Role::U},
                        op(2), {2, 0, 0});
    CHECK_FALSE(t.node(aid(1)).frozen);
    CHECK(t.active_roles(aid(1)).empty());
    // and a plain M grant restores U on the unfrozen account
    t.apply_role_change(Capacity::M, aid(0), aid(1), true, RoleSet{Role::U},
                        op(3), {3, 0, 0});
    CHECK(t.active_roles(aid(1)).contains(Role::U));
}

TEST_CASE("attendant adoption re-parents U-less targets") {
    AccountTree t = base_tree();
    t.apply_role_change(Capacity::M, aid(0), aid(1), true, RoleSet{Role::A},
                        op(1), {1, 0, 0});
    t.apply_role_change(Capacity::M, aid(0), aid(2), true, RoleSet{Role::C},
                        op(2), {1, 1, 0});
    CHECK(*t.node(aid(2)).parent == aid(0));

    // target exists without U: the A grant adopts it
    t.apply_role_change(Capacity::A, aid(1), aid(2), true, RoleSet{Role::U},
                        op(3), {2, 0, 0});
    CHECK(*t.node(aid(2)).parent == aid(1));
    CHECK(t.depth(aid(2)) == 2);
    CHECK(t.active_roles(aid(2)).contains(Role::U));
    CHECK(t.active_roles(aid(2)).contains(Role::C));

    // target already has U: grant is a no-op for the tree shape
    t.apply_role_change(Capacity::A, aid(1), aid(2), true, RoleSet{Role::U},
                        op(4), {3, 0, 0});
    CHECK(*t.node(aid(2)).parent == aid(1));
    CHECK(t.grant_for(aid(2), Role::U)->outpoint == op(4));
}

TEST_CASE("removals on unknown targets throw") {
    AccountTree t = base_tree();
    CHECK_THROWS_AS(t.apply_role_change(Capacity::M, aid(0), aid(9), false,
                                        RoleSet{Role::U}, op(1), {1, 0, 0}),
                    McoinError);
}

TEST_CASE("tree walk is deterministic and acyclic") {
    AccountTree t = base_tree();
    testutil::Rng rng(0x7EE);
    std::vector<Bytes> members{aid(0)};
    for (uint8_t i = 1; i <= 40; ++i) {
        const Bytes& parent = members[rng.below(members.size())];
        t.apply_role_change(Capacity::M, parent, aid(i), true,
                            RoleSet{Role::U}, op(i), {i, 0, 0});
        members.push_back(aid(i));
    }
    CHECK(t.size() == 41);
    // every node reaches the root; depth is consistent with the parent's
    size_t visited = 0;
    t.visit([&](const AccountNode& n, uint64_t d) {
        ++visited;
        if (n.parent) CHECK(d == t.depth(*n.parent) + 1);
        else CHECK(d == 0);
    });
    CHECK(visited == 41);

    AccountTree copy = t;
    CHECK(copy == t);
    copy.apply_role_change(Capacity::M, aid(0), aid(41), true,
                           RoleSet{Role::U}, op(41, 1), {41, 0, 0});
    CHECK_FALSE(copy == t);
}
