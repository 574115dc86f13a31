// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef MCOIN_NVALUE_HPP
#define MCOIN_NVALUE_HPP

#include <mcoin/errors.hpp>
#include <mcoin/roles.hpp>

#include <cstdint>
#include <variant>

namespace mcoin {

// The 64-bit output value field is a tagged union. Reading from the most
// significant bit down:
//
//   0aaa....   coin transfer, 63-bit amount
//   10as....   role change; a = add/remove flag, then 5 role flag bits
//              (M,C,L,U,A), low 56 bits reserved and must be zero
//   11pt....   policy change; p = permanence flag, then a 27-bit policy
//              type (2 reserved bits below it must be zero) ending at
//              bit 32, and a 32-bit parameter in the low word

struct CoinTransfer {
    uint64_t amount = 0; // < 2^63
    bool operator==(const CoinTransfer&) const = default;
};

struct RoleChange {
    bool add = true; // false = removal
    RoleSet roles;
    bool operator==(const RoleChange&) const = default;
};

struct PolicyChange {
    bool permanent = false;
    uint32_t ptype = 0; // < 2^27; defined types are 0..15
    uint32_t param = 0;
    bool operator==(const PolicyChange&) const = default;
};

using NValue = std::variant<CoinTransfer, RoleChange, PolicyChange>;

inline constexpr uint64_t kCoinAmountMax = (uint64_t(1) << 63) - 1;
inline constexpr uint32_t kPolicyTypeMax = (uint32_t(1) << 27) - 1;

// Bit positions (from the LSB end) of the layout above.
inline constexpr int kModeShift = 62;      // top two bits
inline constexpr int kFlagShift = 61;      // add / permanence bit
inline constexpr int kRoleBitsShift = 56;  // 5 role flags end here
inline constexpr int kPolicyTypeShift = 32;

uint64_t encode_nvalue(const NValue& v); // throws McoinError on range errors
NValue decode_nvalue(uint64_t raw);      // throws McoinError on bad encodings

// Non-throwing decode for validation hot paths.
bool try_decode_nvalue(uint64_t raw, NValue& out, Err& err);

inline bool is_coin_mode(uint64_t raw) { return (raw >> 63) == 0; }
inline bool is_role_mode(uint64_t raw) { return (raw >> kModeShift) == 0b10; }
inline bool is_policy_mode(uint64_t raw) { return (raw >> kModeShift) == 0b11; }

} // namespace mcoin

#endif // MCOIN_NVALUE_HPP
