// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#ifndef TDSIM_DIGEST_HPP
#define TDSIM_DIGEST_HPP

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tdsim {

// 256-bit digest used for tx ids, block hashes, merkle nodes and the
// simulation signature scheme.
using Digest = std::array<std::uint8_t, 32>;

constexpr Digest kZeroDigest{};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

// Incremental hasher over OpenSSL EVP.
class Hasher {
public:
    Hasher();
    ~Hasher();
    Hasher(const Hasher&) = delete;
    Hasher& operator=(const Hasher&) = delete;

    Hasher& update(std::span<const std::uint8_t> data);
    Hasher& update(std::string_view data);
    Hasher& update(const Digest& d) { return update(std::span<const std::uint8_t>(d.data(), d.size())); }
    Digest finalize();

private:
    void* ctx_;
};

std::string to_hex(const Digest& d);
Digest from_hex(std::string_view hex);

inline std::span<const std::uint8_t> as_bytes(const std::vector<std::uint8_t>& v) {
    return {v.data(), v.size()};
}

} // namespace tdsim

#endif
