// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#ifndef TDSIM_CHAIN_RECORDS_HPP
#define TDSIM_CHAIN_RECORDS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "digest.hpp"
#include "keys.hpp"
#include "serial.hpp"

namespace tdsim {

using ChunkId = std::uint64_t;
using Tick = std::uint64_t;

// On-chain record announcing who hosts a chunk. Published once all R
// payload commitments exist; each seeder fetches only the payload whose
// header carries its own public key.
struct TrackerRecord {
    ChunkId chunk_id = 0;
    PubKey owner{};
    std::vector<std::pair<PubKey, Digest>> seeder_commitments; // (seeder, merkle root)

    void encode(serial::Writer& w) const {
        w.u64(chunk_id);
        w.digest(owner);
        w.u32(static_cast<std::uint32_t>(seeder_commitments.size()));
        for (const auto& [seeder, root] : seeder_commitments) {
            w.digest(seeder);
            w.digest(root);
        }
    }
};

// Aggregate result of an off-chain proof session window. Only these
// summaries reach the main chain; challenges and responses never do.
struct CheckpointEntry {
    PubKey seeder{};
    ChunkId chunk_id = 0;
    std::uint32_t challenges_passed = 0;
    std::uint32_t challenges_failed = 0;
};

struct ProofCheckpoint {
    Tick from_tick = 0;
    Tick to_tick = 0;
    std::vector<CheckpointEntry> results;

    void encode(serial::Writer& w) const {
        w.u64(from_tick);
        w.u64(to_tick);
        w.u32(static_cast<std::uint32_t>(results.size()));
        for (const auto& r : results) {
            w.digest(r.seeder);
            w.u64(r.chunk_id);
            w.u32(r.challenges_passed);
            w.u32(r.challenges_failed);
        }
    }
};

} // namespace tdsim

#endif
