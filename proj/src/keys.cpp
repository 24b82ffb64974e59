// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#include "keys.hpp"

namespace tdsim {

KeyPair KeyedDigestScheme::generate(const std::string& label) {
    Digest secret = Hasher().update("tdsim.secret/").update(label).finalize();
    PubKey pub = Hasher().update("tdsim.pub/").update(secret).finalize();
    keyring_[pub] = secret;
    return {pub, secret};
}

Signature KeyedDigestScheme::sign(const Digest& secret_key,
                                  std::span<const std::uint8_t> message) const {
    return Hasher().update(secret_key).update(message).finalize();
}

bool KeyedDigestScheme::verify(const PubKey& public_key, std::span<const std::uint8_t> message,
                               const Signature& sig) const {
    auto it = keyring_.find(public_key);
    if (it == keyring_.end()) return false;
    return sign(it->second, message) == sig;
}

} // namespace tdsim
