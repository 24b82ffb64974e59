// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#ifndef TDSIM_SIMNET_HPP
#define TDSIM_SIMNET_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "consensus.hpp"
#include "hosting_market.hpp"
#include "ledger.hpp"
#include "scenario.hpp"
#include "storage_proof.hpp"
#include "token_economy.hpp"

namespace tdsim {

// Single-threaded deterministic event loop. All state transitions happen
// inside advance(); two simulations built from equal configs stay
// bit-identical through any sequence of advance() cuts.
class Simulation {
public:
    explicit Simulation(const ScenarioConfig& config);

    // Executes every event with fire_at <= until, in (fire_at, seq) order.
    void advance(Tick until);
    // advance(horizon) plus end-of-run settlement and the summary record.
    void run();

    Tick now() const { return now_; }
    const ScenarioConfig& config() const { return config_; }
    const ChainState& chain() const { return *chain_; }
    const TokenLedger& ledger() const { return ledger_; }
    const Market& market() const { return market_; }
    const StakePool& pool() const { return *pool_; }

    // Equal digests mean equal simulation states (ledger, pool, market,
    // rng streams, pending events).
    Digest state_digest() const;

    nlohmann::json metrics_json() const;
    std::string events_jsonl() const;
    std::string burn_log_csv() const { return ledger_.burn_log_csv(); }

    std::string node_name(const PubKey& pub) const;
    const KeyPair& node_keys(const std::string& name) const;
    // Payload leaves a seeder currently stores for one chunk (empty when
    // it hosts none). Read-only inspection hook.
    std::vector<std::vector<std::uint8_t>> hosted_leaves(const std::string& seeder,
                                                         ChunkId chunk) const;

private:
    enum class EvKind : std::uint8_t { Block, ChallengeIssue, Resolve, TermEnd };

    struct SimEvent {
        Tick at = 0;
        std::uint64_t seq = 0;
        EvKind kind = EvKind::Block;
        std::uint64_t arg = 0; // challenge id for issue/resolve

        bool operator<(const SimEvent& o) const {
            return at != o.at ? at < o.at : seq < o.seq;
        }
    };

    struct SimNode {
        NodeSpec spec;
        KeyPair keys;
        DetRng rng{0}; // policy randomness (discard draws etc.)
        // Stored payload leaves per hosted chunk.
        std::map<ChunkId, std::vector<std::vector<std::uint8_t>>> leaves;
    };

    // Verifier-side record for one (chunk, seeder) hosting pair.
    struct PairState {
        ChunkCommitment commitment;
        std::vector<std::vector<std::uint8_t>> retained_prefixes;
        bool active = true;
        std::uint32_t failures = 0;
    };

    void schedule(Tick at, EvKind kind, std::uint64_t arg);
    void dispatch(const SimEvent& ev);

    void setup();
    void setup_node(SimNode& node);
    void run_match();
    void install_pair(ChunkId chunk, const PubKey& seeder_pub);
    void on_challenge_issue(std::uint64_t challenge_id);
    void on_resolve(std::uint64_t challenge_id);
    void on_block(Tick t);
    void on_term_end(Tick t);
    void do_equivocation_round(Tick t, SimNode& winner);

    Tick message_delay();
    Tick challenge_end() const;
    SimNode& node_of(const PubKey& pub);
    std::vector<std::uint8_t> chunk_data(ChunkId chunk) const;

    void log_event(nlohmann::json j);
    void drain_token_log();
    void record_supply_point(Tick t);
    nlohmann::json conservation_checks() const;

    ScenarioConfig config_;
    SchemePtr scheme_;
    std::unique_ptr<ChainState> chain_;
    TokenLedger ledger_;
    Market market_;
    std::unique_ptr<StakePool> pool_;
    BurnFraction gamma_;
    SessionBook book_;

    Tick now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::set<SimEvent> queue_;

    std::vector<SimNode> nodes_;
    std::map<PubKey, std::size_t> node_index_;
    std::map<PubKey, std::string> names_;

    std::map<ChunkId, std::size_t> chunk_owner_;
    std::map<std::pair<ChunkId, PubKey>, PairState> pairs_;
    std::map<std::uint64_t, Challenge> challenges_;
    // Response decided at issue time, delivered at the resolve event.
    std::map<std::uint64_t, std::optional<ProofResponse>> planned_;
    std::uint64_t next_challenge_id_ = 0;

    std::vector<Transaction> mempool_;
    std::vector<TrackerRecord> pending_trackers_;
    Tick last_checkpoint_ = 0;

    DetRng delay_rng_{0};
    DetRng nonce_rng_{0};

    // -- metrics --------------------------------------------------------
    std::uint64_t rounds_ = 0;
    std::uint64_t round_skips_ = 0;
    std::uint64_t blocks_accepted_ = 0;
    std::map<PubKey, std::uint64_t> selections_;
    std::uint64_t challenges_issued_ = 0;
    std::uint64_t challenges_passed_ = 0;
    std::uint64_t challenges_failed_ = 0;
    std::map<std::string, std::uint64_t> fail_reasons_;
    std::map<std::string, Tick> first_detection_; // adversary name -> tick
    std::uint64_t dropouts_ = 0;
    std::vector<PubKey> slashed_;
    std::vector<nlohmann::json> supply_series_;

    std::vector<std::string> event_log_;
    std::size_t drained_mints_ = 0;
    std::size_t drained_burns_ = 0;
    bool finalized_ = false;
};

// Convenience wrapper used by the CLI and acceptance harness.
struct RunOutputs {
    nlohmann::json metrics;
    std::string events_jsonl;
    std::string burn_log_csv;
};

RunOutputs run_scenario(const ScenarioConfig& config);

} // namespace tdsim

#endif
