// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef MCOIN_ERRORS_HPP
#define MCOIN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mcoin {

// Stable error codes. The string names are part of the external interface
// (CLI output, python bindings); never rename, only append.
enum class Err {
    None = 0,

    // value / codec
    AmountOverflow,
    TypeOverflow,
    EmptyRoleSet,
    NonzeroReservedBits,
    Truncated,
    BadVersion,
    VarIntOverflow,
    EmptyList,
    BadScript,
    BadHex,

    // account tree
    UnknownAccount,
    UnknownTarget,
    FrozenTarget,

    // policy
    PermanenceViolation,
    BadParam,
    UnknownType,
    DecayAboveMax,

    // transaction validation
    SignatureInvalid,
    MissingURole,
    FrozenAccount,
    NotCovered,
    RoleNotHeld,
    RoleDisabledByPolicy,
    CoinCreationWithoutC,
    CoinCreationLimitExceeded,
    FeeBelowMinimum,
    LDepthViolation,
    DoubleSpend,
    RoleRevoked,
    DuplicateTransaction,

    // block validation
    MissingMinerURole,
    ExcessReward,
    BadCoinbaseShape,
    QuotaViolation,
    BadPoW,
    BadMerkleRoot,
    UnknownParent,

    // chain / tooling
    BadConfig,
    NoURoleForMiner,
    BadScenario,
    UnresolvableInput,
    SigningKeyMissing,
    IOError,
};

const char* err_name(Err e);

class McoinError : public std::runtime_error {
public:
    McoinError(Err code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    explicit McoinError(Err code)
        : std::runtime_error(err_name(code)), code_(code) {}
    Err code() const { return code_; }

private:
    Err code_;
};

inline const char* err_name(Err e) {
    switch (e) {
    case Err::None: return "None";
    case Err::AmountOverflow: return "AmountOverflow";
    case Err::TypeOverflow: return "TypeOverflow";
    case Err::EmptyRoleSet: return "EmptyRoleSet";
    case Err::NonzeroReservedBits: return "NonzeroReservedBits";
    case Err::Truncated: return "Truncated";
    case Err::BadVersion: return "BadVersion";
    case Err::VarIntOverflow: return "VarIntOverflow";
    case Err::EmptyList: return "EmptyList";
    case Err::BadScript: return "BadScript";
    case Err::BadHex: return "BadHex";
    case Err::UnknownAccount: return "UnknownAccount";
    case Err::UnknownTarget: return "UnknownTarget";
    case Err::FrozenTarget: return "FrozenTarget";
    case Err::PermanenceViolation: return "PermanenceViolation";
    case Err::BadParam: return "BadParam";
    case Err::UnknownType: return "UnknownType";
    case Err::DecayAboveMax: return "DecayAboveMax";
    case Err::SignatureInvalid: return "SignatureInvalid";
    case Err::MissingURole: return "MissingURole";
    case Err::FrozenAccount: return "FrozenAccount";
    case Err::NotCovered: return "NotCovered";
    case Err::RoleNotHeld: return "RoleNotHeld";
    case Err::RoleDisabledByPolicy: return "RoleDisabledByPolicy";
    case Err::CoinCreationWithoutC: return "CoinCreationWithoutC";
    case Err::CoinCreationLimitExceeded: return "CoinCreationLimitExceeded";
    case Err::FeeBelowMinimum: return "FeeBelowMinimum";
    case Err::LDepthViolation: return "LDepthViolation";
    case Err::DoubleSpend: return "DoubleSpend";
    case Err::RoleRevoked: return "RoleRevoked";
    case Err::DuplicateTransaction: return "DuplicateTransaction";
    case Err::MissingMinerURole: return "MissingMinerURole";
    case Err::ExcessReward: return "ExcessReward";
    case Err::BadCoinbaseShape: return "BadCoinbaseShape";
    case Err::QuotaViolation: return "QuotaViolation";
    case Err::BadPoW: return "BadPoW";
    case Err::BadMerkleRoot: return "BadMerkleRoot";
    case Err::UnknownParent: return "UnknownParent";
    case Err::BadConfig: return "BadConfig";
    case Err::NoURoleForMiner: return "NoURoleForMiner";
    case Err::BadScenario: return "BadScenario";
    case Err::UnresolvableInput: return "UnresolvableInput";
    case Err::SigningKeyMissing: return "SigningKeyMissing";
    case Err::IOError: return "IOError";
    }
    return "Unknown";
}

} // namespace mcoin

#endif // MCOIN_ERRORS_HPP
