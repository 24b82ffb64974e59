// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#ifndef TDSIM_HOSTING_MARKET_HPP
#define TDSIM_HOSTING_MARKET_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "chain_records.hpp"
#include "keys.hpp"
#include "token_economy.hpp"

namespace tdsim {

struct HostingRequest {
    PubKey owner{};
    std::vector<ChunkId> chunk_ids;
    std::uint64_t size_mb = 0; // 1 MB per chunk
    std::uint64_t tokens_escrowed = 0;
};

// Seeder-side escrow is accounted in capacity credits: one committed leecher
// token backs R credits, one credit per assigned chunk. Keeping the unit at
// the credit level makes dropout forfeiture exact integer arithmetic.
struct SeederCapacity {
    PubKey seeder{};
    std::uint64_t tokens_committed = 0;
    std::uint64_t capacity_credits = 0; // tokens * R
    std::uint64_t assigned_credits = 0;
    std::uint64_t forfeited_credits = 0;

    std::uint64_t free_credits() const {
        return capacity_credits - assigned_credits - forfeited_credits;
    }
};

struct HostingAssignment {
    ChunkId chunk_id = 0;
    PubKey owner{};
    std::vector<PubKey> seeders; // exactly R when healthy
    std::map<PubKey, Digest> payload_commitments;
    std::set<PubKey> dropped; // never re-assigned to this chunk
    bool tracker_published = false;
    bool degraded = false;
};

// Per-seeder payload: chunk_data || seeder_pub || nonce under a keyed
// stream transform only the owner can invert. seeder_pubkey and nonce
// travel in the clear header.
struct Payload {
    std::vector<std::uint8_t> ciphertext;
    PubKey seeder_pubkey{};
    Digest nonce{};
};

Payload build_payload(const KeyPair& owner, std::span<const std::uint8_t> chunk_data,
                      const PubKey& seeder_pub, const Digest& nonce);
// Throws NotOwner when the wrong secret is used (the embedded pubkey check
// fails on the garbage plaintext).
std::vector<std::uint8_t> decrypt_payload(const Digest& owner_secret, const Payload& p);

class Market {
public:
    Market(std::uint64_t replication, double base_rate)
        : replication_(replication), base_rate_(base_rate) {}

    std::uint64_t replication() const { return replication_; }

    HostingRequest submit_hosting_request(const KeyPair& owner, TokenLedger& ledger,
                                          const std::vector<ChunkId>& chunks, Tick tick);
    SeederCapacity register_capacity(const KeyPair& seeder, TokenLedger& ledger,
                                     std::uint64_t tokens, Tick tick);

    // Greedy deterministic matching: queued chunks FIFO, each filled with the
    // R most-free distinct seeders (ties by public key order). Returns the
    // chunks that became fully assigned in this pass.
    std::vector<ChunkId> match();

    void record_commitment(ChunkId chunk, const PubKey& seeder, const Digest& merkle_root);
    TrackerRecord publish_tracker(ChunkId chunk);

    // Forfeits one capacity credit of the dropped seeder, removes it from
    // the assignment and requeues the slot. Owner escrow is untouched.
    void handle_dropout(ChunkId chunk, const PubKey& seeder, TokenLedger& ledger, Tick now);

    // Hosting term settlement for one owner: escrow is consumed (burned) or
    // refunded depending on scenario policy.
    void settle_owner_escrow(const PubKey& owner, TokenLedger& ledger, bool refund, Tick now);

    ExchangeState exchange_state() const;
    std::uint64_t pending_demand_mb() const;
    std::uint64_t available_capacity_mb() const;

    const std::map<ChunkId, HostingAssignment>& assignments() const { return assignments_; }
    const HostingAssignment* assignment(ChunkId chunk) const;
    const std::map<PubKey, SeederCapacity>& seeders() const { return seeders_; }
    std::uint64_t owner_escrow(const PubKey& owner) const;
    std::uint64_t owner_escrow_total() const;
    std::uint64_t seeder_escrow_credits() const; // assigned + free, excludes forfeited
    std::uint64_t forfeited_credits_total() const;
    std::uint64_t consumed_tokens_total() const { return consumed_tokens_; }
    std::uint64_t degraded_count() const;

private:
    struct QueueSlot {
        ChunkId chunk;
        PubKey owner;
    };

    std::uint64_t replication_;
    double base_rate_;
    std::deque<QueueSlot> queue_;
    std::map<PubKey, SeederCapacity> seeders_;
    std::map<ChunkId, HostingAssignment> assignments_;
    std::map<PubKey, std::uint64_t> owner_escrow_;
    // total leecher tokens ever taken in by the contract (owners + seeders)
    std::uint64_t consumed_tokens_ = 0;
};

} // namespace tdsim

#endif
