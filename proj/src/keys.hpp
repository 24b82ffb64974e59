// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#ifndef TDSIM_KEYS_HPP
#define TDSIM_KEYS_HPP

#include <map>
#include <memory>
#include <string>

#include "digest.hpp"

namespace tdsim {

using PubKey = Digest;
using Signature = Digest;

struct KeyPair {
    PubKey public_key;
    Digest secret_key;
};

// Coins sent here are destroyed: nobody holds the preimage of the all-zero
// public key.
inline const PubKey kBurnAddress = kZeroDigest;

// Pluggable signing backend. The protocol properties under test are not
// cryptographic, so the simulation default is a deterministic keyed digest
// with the same verify contract a real asymmetric scheme would offer.
class SignatureScheme {
public:
    virtual ~SignatureScheme() = default;
    virtual KeyPair generate(const std::string& label) = 0;
    virtual Signature sign(const Digest& secret_key, std::span<const std::uint8_t> message) const = 0;
    virtual bool verify(const PubKey& public_key, std::span<const std::uint8_t> message,
                        const Signature& sig) const = 0;
};

// sign = digest(secret_key || message); public_key = digest("pub" || secret).
// Verification resolves the secret through the keyring built up by generate().
class KeyedDigestScheme : public SignatureScheme {
public:
    KeyPair generate(const std::string& label) override;
    Signature sign(const Digest& secret_key, std::span<const std::uint8_t> message) const override;
    bool verify(const PubKey& public_key, std::span<const std::uint8_t> message,
                const Signature& sig) const override;

private:
    std::map<PubKey, Digest> keyring_;
};

using SchemePtr = std::shared_ptr<SignatureScheme>;

} // namespace tdsim

#endif
