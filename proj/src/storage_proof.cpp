// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#include "storage_proof.hpp"

#include <algorithm>
#include <cmath>

namespace tdsim {

const char* proof_fail_name(ProofFail f) {
    switch (f) {
        case ProofFail::None: return "None";
        case ProofFail::Late: return "Late";
        case ProofFail::BadPath: return "BadPath";
        case ProofFail::BadLiveness: return "BadLiveness";
        case ProofFail::WrongIndices: return "WrongIndices";
    }
    return "?";
}

std::vector<std::vector<std::uint8_t>> split_leaves(std::span<const std::uint8_t> data,
                                                    std::uint32_t leaf_size) {
    if (data.empty()) fail(Err::EmptyPayload, "cannot commit an empty payload");
    std::vector<std::vector<std::uint8_t>> leaves;
    for (std::size_t off = 0; off < data.size(); off += leaf_size) {
        std::size_t n = std::min<std::size_t>(leaf_size, data.size() - off);
        leaves.emplace_back(data.begin() + off, data.begin() + off + n);
        leaves.back().resize(leaf_size, 0);
    }
    std::size_t pow2 = 2;
    while (pow2 < leaves.size()) pow2 *= 2;
    while (leaves.size() < pow2) leaves.emplace_back(leaf_size, 0);
    return leaves;
}

Digest merkle_leaf_hash(std::span<const std::uint8_t> leaf) {
    Hasher h;
    std::uint8_t tag = 0x00;
    h.update(std::span<const std::uint8_t>(&tag, 1)).update(leaf);
    return h.finalize();
}

static Digest node_hash(const Digest& l, const Digest& r) {
    Hasher h;
    std::uint8_t tag = 0x01;
    h.update(std::span<const std::uint8_t>(&tag, 1)).update(l).update(r);
    return h.finalize();
}

static std::vector<std::vector<Digest>> build_levels(
    const std::vector<std::vector<std::uint8_t>>& leaves) {
    std::vector<std::vector<Digest>> levels;
    levels.emplace_back();
    for (const auto& leaf : leaves) levels.back().push_back(merkle_leaf_hash(as_bytes(leaf)));
    while (levels.back().size() > 1) {
        const auto& prev = levels.back();
        std::vector<Digest> next;
        for (std::size_t i = 0; i < prev.size(); i += 2) next.push_back(node_hash(prev[i], prev[i + 1]));
        levels.push_back(std::move(next));
    }
    return levels;
}

Digest merkle_root(const std::vector<std::vector<std::uint8_t>>& leaves) {
    return build_levels(leaves).back()[0];
}

std::vector<Digest> merkle_path(const std::vector<std::vector<std::uint8_t>>& leaves,
                                std::uint32_t index) {
    auto levels = build_levels(leaves);
    std::vector<Digest> path;
    std::uint32_t i = index;
    for (std::size_t lvl = 0; lvl + 1 < levels.size(); ++lvl) {
        path.push_back(levels[lvl][i ^ 1]);
        i >>= 1;
    }
    return path;
}

bool merkle_verify(const Digest& root, std::uint32_t index, std::uint32_t leaf_count,
                   std::span<const std::uint8_t> leaf, const std::vector<Digest>& path) {
    if (index >= leaf_count) return false;
    std::uint32_t depth = 0;
    while ((1u << depth) < leaf_count) ++depth;
    if (path.size() != depth) return false;
    Digest h = merkle_leaf_hash(leaf);
    std::uint32_t i = index;
    for (const auto& sibling : path) {
        h = (i & 1) ? node_hash(sibling, h) : node_hash(h, sibling);
        i >>= 1;
    }
    return h == root;
}

ChunkCommitment commit_chunk(ChunkId chunk, const PubKey& seeder, const Payload& payload,
                             std::uint32_t leaf_size) {
    auto leaves = split_leaves(as_bytes(payload.ciphertext), leaf_size);
    ChunkCommitment c;
    c.chunk_id = chunk;
    c.seeder = seeder;
    c.merkle_root = merkle_root(leaves);
    c.leaf_count = static_cast<std::uint32_t>(leaves.size());
    c.leaf_size = leaf_size;
    return c;
}

std::vector<std::vector<std::uint8_t>> retain_leaf_prefixes(const Payload& payload,
                                                            std::uint32_t leaf_size,
                                                            std::uint32_t liveness_len) {
    auto leaves = split_leaves(as_bytes(payload.ciphertext), leaf_size);
    std::vector<std::vector<std::uint8_t>> prefixes;
    prefixes.reserve(leaves.size());
    for (auto& leaf : leaves) {
        leaf.resize(std::min<std::size_t>(leaf.size(), liveness_len));
        prefixes.push_back(std::move(leaf));
    }
    return prefixes;
}

std::vector<Challenge> schedule_challenges(DetRng& rng, const ChunkCommitment& commitment,
                                           const ChallengeParams& params, Tick start,
                                           Tick horizon, std::uint64_t& next_challenge_id) {
    std::vector<Challenge> out;
    if (params.mean_interval <= 0) fail(Err::ConfigInvalid, "mean_interval must be > 0");
    double t = static_cast<double>(start);
    while (true) {
        t += rng.exponential(params.mean_interval);
        Tick issue = static_cast<Tick>(t);
        if (issue > horizon || t > static_cast<double>(horizon)) break;
        Challenge c;
        c.challenge_id = next_challenge_id++;
        c.chunk_id = commitment.chunk_id;
        c.seeder = commitment.seeder;
        std::uint32_t k = std::min<std::uint32_t>(params.k, commitment.leaf_count);
        while (c.leaf_indices.size() < k) {
            auto idx = static_cast<std::uint32_t>(rng.uniform(commitment.leaf_count));
            if (std::find(c.leaf_indices.begin(), c.leaf_indices.end(), idx) ==
                c.leaf_indices.end())
                c.leaf_indices.push_back(idx);
        }
        c.issued_at = issue;
        c.deadline = issue + params.response_window;
        out.push_back(std::move(c));
    }
    return out;
}

std::optional<ProofResponse> respond(const Challenge& challenge,
                                     const std::vector<std::vector<std::uint8_t>>& leaves,
                                     const std::function<bool(std::uint32_t)>& has_leaf,
                                     std::uint32_t liveness_len, Tick responded_at) {
    for (auto idx : challenge.leaf_indices)
        if (idx >= leaves.size() || (has_leaf && !has_leaf(idx))) return std::nullopt;

    ProofResponse r;
    r.challenge_id = challenge.challenge_id;
    for (auto idx : challenge.leaf_indices) {
        ProofLeaf pl;
        pl.index = idx;
        pl.leaf = leaves[idx];
        pl.path = merkle_path(leaves, idx);
        r.leaves.push_back(std::move(pl));
    }
    const auto& first = leaves[challenge.leaf_indices[0]];
    r.liveness_sample.assign(first.begin(),
                             first.begin() + std::min<std::size_t>(first.size(), liveness_len));
    r.responded_at = responded_at;
    return r;
}

ProofFail verify_response(const Challenge& challenge, const ProofResponse& response,
                          const ChunkCommitment& commitment,
                          const std::vector<std::vector<std::uint8_t>>& retained_prefixes,
                          Tick now) {
    (void)now;
    if (response.responded_at > challenge.deadline) return ProofFail::Late;
    if (response.leaves.size() != challenge.leaf_indices.size()) return ProofFail::WrongIndices;
    for (std::size_t i = 0; i < response.leaves.size(); ++i)
        if (response.leaves[i].index != challenge.leaf_indices[i]) return ProofFail::WrongIndices;
    for (const auto& pl : response.leaves)
        if (!merkle_verify(commitment.merkle_root, pl.index, commitment.leaf_count,
                           as_bytes(pl.leaf), pl.path))
            return ProofFail::BadPath; // the checksum test
    std::uint32_t live_idx = challenge.leaf_indices[0];
    if (live_idx >= retained_prefixes.size() ||
        response.liveness_sample != retained_prefixes[live_idx])
        return ProofFail::BadLiveness;
    return ProofFail::None;
}

void SessionBook::record(const PubKey& seeder, ChunkId chunk, bool passed) {
    auto& [pass, failed] = window_[{seeder, chunk}];
    if (passed)
        ++pass;
    else
        ++failed;
}

ProofCheckpoint SessionBook::make_checkpoint(Tick from, Tick to) {
    if (last_settled_ && *last_settled_ >= to)
        fail(Err::DuplicateCheckpoint, "checkpoint window already settled");
    ProofCheckpoint cp;
    cp.from_tick = from;
    cp.to_tick = to;
    for (const auto& [key, counts] : window_)
        cp.results.push_back({key.first, key.second, counts.first, counts.second});
    window_.clear();
    last_settled_ = to;
    return cp;
}

} // namespace tdsim
