// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef MCOIN_POLICY_HPP
#define MCOIN_POLICY_HPP

#include <mcoin/accounts.hpp>
#include <mcoin/bytes.hpp>
#include <mcoin/errors.hpp>
#include <mcoin/roles.hpp>

#include <map>
#include <set>
#include <vector>

namespace mcoin {

// Policy types. 0..4 enable/disable the five roles in MCLUA order, the
// rest parameterise consensus behaviour:
//
//    5  enable L-forced coin moves          binary
//    6  per-block coin creation limit       0 = unlimited
//    7  reward mode                         0 manual, 1 self-adjusting
//    8  manual reward value
//    9  reward floor
//   10  reward decay per epoch              Q0.32 fraction
//   11  maximum allowed decay               Q0.32 fraction
//   12  minimum transaction fee
//   13  management quota window length      0 = quota disabled
//   14  management quota per window
//   15  reserved no-op                      param must be 0
inline constexpr uint32_t kPolicyTypeCount = 16;

inline bool policy_type_is_binary(uint32_t t) {
    return t <= 5 || t == 7;
}

struct PolicyRecord {
    uint32_t ptype = 0;
    uint32_t param = 0;
    bool permanent = false;
    Bytes issuer;
    PriorityKey priority; // issuer's authority rank when accepted
    Provenance position;
    bool operator==(const PolicyRecord&) const = default;
};

// Accepted policy records and the values they resolve to. For each type the
// effective value comes from the record whose issuer has the best (lowest)
// authority rank; among records from that issuer, the latest position wins.
// Types nobody has set fall back to defaults: binary types default to
// enabled, numeric types to the genesis-configured value (0 if unlisted).
class PolicyState {
public:
    PolicyState() = default;
    explicit PolicyState(std::map<uint32_t, uint32_t> numeric_defaults)
        : defaults_(std::move(numeric_defaults)) {}

    // Err::None when the record would be accepted.
    Err check(const PolicyRecord& r) const;
    void apply(const PolicyRecord& r); // throws McoinError on check failure

    uint32_t effective(uint32_t ptype) const; // throws UnknownType
    bool role_enabled(Role r) const {
        return effective(uint32_t(r)) != 0;
    }

    // Count of records ever accepted. Validation contexts are copied on
    // every block connect, so the state keeps resolution maps only, never
    // an unbounded record log.
    uint64_t accepted_count() const { return accepted_; }
    uint32_t default_for(uint32_t ptype) const;

    bool operator==(const PolicyState&) const = default;

private:
    std::map<uint32_t, uint32_t> defaults_;
    uint64_t accepted_ = 0;
    // per type: issuer rank -> that issuer's latest record
    std::map<uint32_t, std::map<PriorityKey, PolicyRecord>> by_type_;
    std::set<std::pair<uint32_t, Bytes>> permanent_;
};

} // namespace mcoin

#endif // MCOIN_POLICY_HPP
