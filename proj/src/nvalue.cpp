// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <mcoin/nvalue.hpp>

namespace mcoin {

namespace {

bool encode_impl(const NValue& v, uint64_t& out, Err& err) {
    if (const auto* c = std::get_if<CoinTransfer>(&v)) {
        if (c->amount > kCoinAmountMax) {
            err = Err::AmountOverflow;
            return false;
        }
        out = c->amount;
        return true;
    }
    if (const auto* r = std::get_if<RoleChange>(&v)) {
        if (r->roles.empty()) {
            err = Err::EmptyRoleSet;
            return false;
        }
        out = (uint64_t(0b10) << kModeShift) |
              (uint64_t(r->add ? 1 : 0) << kFlagShift) |
              (uint64_t(r->roles.to_wire()) << kRoleBitsShift);
        return true;
    }
    const auto& p = std::get<PolicyChange>(v);
    if (p.ptype > kPolicyTypeMax) {
        err = Err::TypeOverflow;
        return false;
    }
    out = (uint64_t(0b11) << kModeShift) |
          (uint64_t(p.permanent ? 1 : 0) << kFlagShift) |
          (uint64_t(p.ptype) << kPolicyTypeShift) | uint64_t(p.param);
    return true;
}

bool decode_impl(uint64_t raw, NValue& out, Err& err) {
    if (is_coin_mode(raw)) {
        out = CoinTransfer{raw};
        return true;
    }
    if (is_role_mode(raw)) {
        // Low 56 bits are reserved; a strict decoder refuses them so that
        // encode(decode(x)) == x holds for every accepted word.
        if ((raw & ((uint64_t(1) << kRoleBitsShift) - 1)) != 0) {
            err = Err::NonzeroReservedBits;
            return false;
        }
        RoleSet roles = RoleSet::from_wire(uint8_t((raw >> kRoleBitsShift) & 0x1F));
        if (roles.empty()) {
            err = Err::EmptyRoleSet;
            return false;
        }
        out = RoleChange{((raw >> kFlagShift) & 1) != 0, roles};
        return true;
    }
    // Policy mode. 29 bits sit between the permanence flag and the
    // parameter; the top 2 of them are reserved-zero, leaving 27 type bits.
    uint64_t typefield = (raw >> kPolicyTypeShift) & ((uint64_t(1) << 29) - 1);
    if (typefield > kPolicyTypeMax) {
        err = Err::NonzeroReservedBits;
        return false;
    }
    out = PolicyChange{((raw >> kFlagShift) & 1) != 0, uint32_t(typefield),
                       uint32_t(raw & 0xFFFFFFFFu)};
    return true;
}

} // namespace

uint64_t encode_nvalue(const NValue& v) {
    uint64_t out = 0;
    Err err = Err::None;
    if (!encode_impl(v, out, err)) throw McoinError(err);
    return out;
}

NValue decode_nvalue(uint64_t raw) {
    NValue out;
    Err err = Err::None;
    if (!decode_impl(raw, out, err)) throw McoinError(err);
    return out;
}

bool try_decode_nvalue(uint64_t raw, NValue& out, Err& err) {
    return decode_impl(raw, out, err);
}

} // namespace mcoin
