// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#ifndef TDSIM_STORAGE_PROOF_HPP
#define TDSIM_STORAGE_PROOF_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "chain_records.hpp"
#include "hosting_market.hpp"
#include "keys.hpp"
#include "rng.hpp"

namespace tdsim {

// Merkle proof-of-retrievability over the payload ciphertext. This stands
// behind the same pass/fail contract a zero-knowledge proof-of-space-and-time
// would, so a real construction can be slotted in later.

struct ChunkCommitment {
    ChunkId chunk_id = 0;
    PubKey seeder{};
    Digest merkle_root{};
    std::uint32_t leaf_count = 0; // padded to a power of two, >= 2
    std::uint32_t leaf_size = 0;
};

struct Challenge {
    std::uint64_t challenge_id = 0;
    ChunkId chunk_id = 0;
    PubKey seeder{};
    std::vector<std::uint32_t> leaf_indices; // k distinct, < leaf_count
    Tick issued_at = 0;
    Tick deadline = 0; // issued_at + W
};

struct ProofLeaf {
    std::uint32_t index = 0;
    std::vector<std::uint8_t> leaf;
    std::vector<Digest> path; // sibling hashes, leaf level upward
};

struct ProofResponse {
    std::uint64_t challenge_id = 0;
    std::vector<ProofLeaf> leaves;
    std::vector<std::uint8_t> liveness_sample; // prefix of the first challenged leaf
    Tick responded_at = 0;
};

enum class ProofFail { None, Late, BadPath, BadLiveness, WrongIndices };
const char* proof_fail_name(ProofFail f);

// -- merkle primitives ------------------------------------------------------
std::vector<std::vector<std::uint8_t>> split_leaves(std::span<const std::uint8_t> data,
                                                    std::uint32_t leaf_size);
Digest merkle_leaf_hash(std::span<const std::uint8_t> leaf);
Digest merkle_root(const std::vector<std::vector<std::uint8_t>>& leaves);
std::vector<Digest> merkle_path(const std::vector<std::vector<std::uint8_t>>& leaves,
                                std::uint32_t index);
bool merkle_verify(const Digest& root, std::uint32_t index, std::uint32_t leaf_count,
                   std::span<const std::uint8_t> leaf, const std::vector<Digest>& path);

// ---------------------------------------------------------------------------
ChunkCommitment commit_chunk(ChunkId chunk, const PubKey& seeder, const Payload& payload,
                             std::uint32_t leaf_size);

// Leaf prefixes the verifier keeps at commitment time for the liveness check.
std::vector<std::vector<std::uint8_t>> retain_leaf_prefixes(const Payload& payload,
                                                            std::uint32_t leaf_size,
                                                            std::uint32_t liveness_len);

struct ChallengeParams {
    std::uint32_t k = 2;            // leaves per challenge
    Tick response_window = 10;      // W
    double mean_interval = 50.0;    // ticks between challenges
    std::uint32_t liveness_len = 32;
};

// Poisson-style schedule: exponential inter-arrivals discretized to ticks.
std::vector<Challenge> schedule_challenges(DetRng& rng, const ChunkCommitment& commitment,
                                           const ChallengeParams& params, Tick start,
                                           Tick horizon, std::uint64_t& next_challenge_id);

// Honest response path. has_leaf lets adversarial policies drop leaves; a
// missing challenged leaf means no response at all (a path cannot be forged).
std::optional<ProofResponse> respond(const Challenge& challenge,
                                     const std::vector<std::vector<std::uint8_t>>& leaves,
                                     const std::function<bool(std::uint32_t)>& has_leaf,
                                     std::uint32_t liveness_len, Tick responded_at);

ProofFail verify_response(const Challenge& challenge, const ProofResponse& response,
                          const ChunkCommitment& commitment,
                          const std::vector<std::vector<std::uint8_t>>& retained_prefixes,
                          Tick now);

// Aggregates pass/fail counts between checkpoints; one checkpoint per window.
class SessionBook {
public:
    void record(const PubKey& seeder, ChunkId chunk, bool passed);
    // Builds the checkpoint for (from, to] and resets the window. Throws
    // DuplicateCheckpoint if the window was already settled.
    ProofCheckpoint make_checkpoint(Tick from, Tick to);
    std::uint64_t window_results() const { return window_.size(); }

private:
    std::map<std::pair<PubKey, ChunkId>, std::pair<std::uint32_t, std::uint32_t>> window_;
    std::optional<Tick> last_settled_;
};

} // namespace tdsim

#endif
