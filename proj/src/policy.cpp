// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <mcoin/policy.hpp>

namespace mcoin {

uint32_t PolicyState::default_for(uint32_t ptype) const {
    if (ptype >= kPolicyTypeCount) throw McoinError(Err::UnknownType);
    if (policy_type_is_binary(ptype)) return 1;
    if (ptype == 15) return 0;
    auto it = defaults_.find(ptype);
    return it == defaults_.end() ? 0 : it->second;
}

uint32_t PolicyState::effective(uint32_t ptype) const {
    if (ptype >= kPolicyTypeCount) throw McoinError(Err::UnknownType);
    auto it = by_type_.find(ptype);
    if (it == by_type_.end() || it->second.empty()) return default_for(ptype);
    return it->second.begin()->second.param;
}

Err PolicyState::check(const PolicyRecord& r) const {
    if (r.ptype >= kPolicyTypeCount) return Err::UnknownType;
    if (policy_type_is_binary(r.ptype) && r.param > 1) return Err::BadParam;
    if (r.ptype == 15 && r.param != 0) return Err::BadParam;
    if (permanent_.count({r.ptype, r.issuer})) return Err::PermanenceViolation;
    // The decay pair constrain each other: a decay above the allowed
    // maximum is refused, as is lowering the maximum below the current
    // decay.
    if (r.ptype == 10 && r.param > effective(11)) return Err::DecayAboveMax;
    if (r.ptype == 11 && r.param < effective(10)) return Err::DecayAboveMax;
    return Err::None;
}

void PolicyState::apply(const PolicyRecord& r) {
    Err e = check(r);
    if (e != Err::None) throw McoinError(e);
    accepted_ += 1;
    auto& slot = by_type_[r.ptype];
    auto it = slot.find(r.priority);
    if (it == slot.end() || it->second.position < r.position)
        slot[r.priority] = r;
    if (r.permanent) permanent_.insert({r.ptype, r.issuer});
    // A no-op record is logged (it counts as administrator activity) but
    // never resolves to a value.
    if (r.ptype == 15) by_type_.erase(15);
}

} // namespace mcoin
