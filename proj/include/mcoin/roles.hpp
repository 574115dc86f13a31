// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef MCOIN_ROLES_HPP
#define MCOIN_ROLES_HPP

#include <mcoin/errors.hpp>

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace mcoin {

// The five account roles. Order matters: it is the wire order of the role
// flag bits (M first) and the canonical display order "MCLUA".
enum class Role : uint8_t { M = 0, C = 1, L = 2, U = 3, A = 4 };

inline constexpr char kRoleLetters[5] = {'M', 'C', 'L', 'U', 'A'};

class RoleSet {
public:
    constexpr RoleSet() : bits_(0) {}
    constexpr explicit RoleSet(uint8_t bits) : bits_(bits & 0x1F) {}
    RoleSet(std::initializer_list<Role> roles) : bits_(0) {
        for (Role r : roles) add(r);
    }

    static constexpr RoleSet all() { return RoleSet(0x1F); }
    static RoleSet of(Role r) { return RoleSet(uint8_t(1u << uint8_t(r))); }

    bool contains(Role r) const { return (bits_ >> uint8_t(r)) & 1u; }
    void add(Role r) { bits_ |= uint8_t(1u << uint8_t(r)); }
    void remove(Role r) { bits_ &= uint8_t(~(1u << uint8_t(r))); }

    bool empty() const { return bits_ == 0; }
    int count() const { return __builtin_popcount(bits_); }
    uint8_t bits() const { return bits_; }

    bool subset_of(RoleSet other) const { return (bits_ & ~other.bits_) == 0; }
    RoleSet operator|(RoleSet o) const { return RoleSet(uint8_t(bits_ | o.bits_)); }
    RoleSet operator&(RoleSet o) const { return RoleSet(uint8_t(bits_ & o.bits_)); }
    RoleSet operator-(RoleSet o) const { return RoleSet(uint8_t(bits_ & ~o.bits_)); }
    bool operator==(const RoleSet&) const = default;

    // Wire form: 5 bits ordered M,C,L,U,A from most to least significant.
    uint8_t to_wire() const {
        uint8_t w = 0;
        for (int i = 0; i < 5; ++i)
            if (contains(Role(i))) w |= uint8_t(1u << (4 - i));
        return w;
    }
    static RoleSet from_wire(uint8_t w) {
        RoleSet s;
        for (int i = 0; i < 5; ++i)
            if ((w >> (4 - i)) & 1u) s.add(Role(i));
        return s;
    }

    std::string letters() const {
        std::string out;
        for (int i = 0; i < 5; ++i)
            if (contains(Role(i))) out.push_back(kRoleLetters[i]);
        return out;
    }
    // Accepts any ordering of "MCLUA" letters; throws on anything else.
    static RoleSet from_letters(std::string_view s) {
        RoleSet out;
        for (char c : s) {
            bool hit = false;
            for (int i = 0; i < 5; ++i) {
                if (c == kRoleLetters[i]) {
                    out.add(Role(i));
                    hit = true;
                    break;
                }
            }
            if (!hit)
                throw McoinError(Err::BadConfig,
                                 std::string("unknown role letter: ") + c);
        }
        return out;
    }

private:
    uint8_t bits_;
};

} // namespace mcoin

#endif // MCOIN_ROLES_HPP
