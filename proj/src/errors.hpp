// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#ifndef TDSIM_ERRORS_HPP
#define TDSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tdsim {

enum class Err {
    UnknownUtxo,
    InsufficientFunds,
    NotOwner,
    BadCoinbase,
    UnknownParent,
    InvalidTx,
    ZeroMint,
    InsufficientTokens,
    InsufficientLeecherTokens,
    NothingToStake,
    AlreadyStaked,
    EmptyPool,
    InvalidBlock,
    EmptyRequest,
    MissingCommitments,
    EmptyPayload,
    DuplicateCheckpoint,
    UnknownNode,
    ConfigInvalid,
    Io,
};

const char* err_name(Err e);

// Precondition failures surface as exceptions; validation verdicts
// (verify_transaction etc.) are returned as values instead.
class TdError : public std::runtime_error {
public:
    TdError(Err code, std::string msg)
        : std::runtime_error(std::move(msg)), code_(code) {}

    Err code() const { return code_; }

private:
    Err code_;
};

[[noreturn]] inline void fail(Err code, std::string msg) {
    throw TdError(code, std::move(msg));
}

} // namespace tdsim

#endif
