// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#include "simnet.hpp"

#include <algorithm>
#include <cassert>

namespace tdsim {

using nlohmann::json;

Simulation::Simulation(const ScenarioConfig& config)
    : config_(config),
      scheme_(std::make_shared<KeyedDigestScheme>()),
      market_(config.replication, config.base_rate),
      gamma_(BurnFraction::from_double(config.gamma)),
      delay_rng_(DetRng::derive(config.seed, "delay")),
      nonce_rng_(DetRng::derive(config.seed, "nonce")) {
    config_.validate();
    pool_ = std::make_unique<StakePool>(DetRng::derive(config_.seed, "lottery"));
    setup();
}

void Simulation::schedule(Tick at, EvKind kind, std::uint64_t arg) {
    queue_.insert({at, next_seq_++, kind, arg});
}

Tick Simulation::message_delay() {
    if (config_.delay.uniform)
        return config_.delay.min +
               delay_rng_.uniform(config_.delay.max - config_.delay.min + 1);
    return config_.delay.fixed;
}

Tick Simulation::challenge_end() const {
    if (config_.hosting_term_ticks == 0) return config_.horizon_ticks;
    return std::min(config_.horizon_ticks, config_.hosting_term_ticks);
}

Simulation::SimNode& Simulation::node_of(const PubKey& pub) {
    return nodes_[node_index_.at(pub)];
}

std::string Simulation::node_name(const PubKey& pub) const {
    auto it = names_.find(pub);
    return it == names_.end() ? to_hex(pub).substr(0, 12) : it->second;
}

const KeyPair& Simulation::node_keys(const std::string& name) const {
    for (const auto& n : nodes_)
        if (n.spec.name == name) return n.keys;
    fail(Err::UnknownNode, "no node named \"" + name + "\"");
}

std::vector<std::vector<std::uint8_t>> Simulation::hosted_leaves(const std::string& seeder,
                                                                 ChunkId chunk) const {
    for (const auto& n : nodes_) {
        if (n.spec.name != seeder) continue;
        auto it = n.leaves.find(chunk);
        return it == n.leaves.end() ? std::vector<std::vector<std::uint8_t>>{} : it->second;
    }
    fail(Err::UnknownNode, "no node named \"" + seeder + "\"");
}

std::vector<std::uint8_t> Simulation::chunk_data(ChunkId chunk) const {
    DetRng r = DetRng::derive(config_.seed, "chunk/" + std::to_string(chunk));
    std::vector<std::uint8_t> data(config_.chunk_bytes);
    for (std::size_t i = 0; i < data.size(); i += 8) {
        std::uint64_t x = r.next_u64();
        for (std::size_t b = 0; b < 8 && i + b < data.size(); ++b)
            data[i + b] = static_cast<std::uint8_t>(x >> (8 * b));
    }
    return data;
}

void Simulation::log_event(json j) {
    j["t"] = now_;
    event_log_.push_back(j.dump());
}

void Simulation::drain_token_log() {
    const auto& mints = ledger_.mint_log();
    for (; drained_mints_ < mints.size(); ++drained_mints_) {
        const auto& e = mints[drained_mints_];
        log_event({{"type", "mint"},
                   {"kind", e.kind},
                   {"amount", e.amount},
                   {"reason", e.reason},
                   {"account", node_name(e.account)},
                   {"tick", e.tick}});
    }
    const auto& burns = ledger_.burn_log();
    for (; drained_burns_ < burns.size(); ++drained_burns_) {
        const auto& e = burns[drained_burns_];
        log_event({{"type", "burn"},
                   {"kind", e.kind},
                   {"amount", e.amount},
                   {"reason", e.reason},
                   {"account", node_name(e.account)},
                   {"tick", e.tick}});
    }
}

// -- setup ------------------------------------------------------------------

void Simulation::setup() {
    std::vector<std::pair<PubKey, std::uint64_t>> allocations;
    for (const auto& spec : config_.nodes) {
        SimNode node;
        node.spec = spec;
        node.keys = scheme_->generate(spec.name);
        node.rng = DetRng::derive(config_.seed, "node/" + spec.name);
        names_[node.keys.public_key] = spec.name;
        node_index_[node.keys.public_key] = nodes_.size();
        if (spec.initial_td > 0) allocations.emplace_back(node.keys.public_key, spec.initial_td);
        nodes_.push_back(std::move(node));
    }
    chain_ = std::make_unique<ChainState>(scheme_, config_.block_reward, config_.max_txs,
                                          allocations);
    for (const auto& [pub, amount] : allocations)
        ledger_.log_mint("td", amount, pub, 0, "genesis");
    drain_token_log();

    for (auto& node : nodes_) setup_node(node);
    drain_token_log();

    run_match();

    for (Tick t = config_.block_interval; t <= config_.horizon_ticks;
         t += config_.block_interval)
        schedule(t, EvKind::Block, 0);
    if (config_.hosting_term_ticks > 0 &&
        config_.hosting_term_ticks < config_.horizon_ticks)
        schedule(config_.hosting_term_ticks, EvKind::TermEnd, 0);
}

void Simulation::setup_node(SimNode& node) {
    const NodeSpec& spec = node.spec;
    if (spec.seed_bonus > 0)
        ledger_.award_seed_bonus(node.keys.public_key, spec.seed_bonus, 0, "genesis");

    if (spec.burn_td > 0) {
        auto result = burn_td_for_leecher(*chain_, ledger_, node.keys, spec.burn_td,
                                          market_.exchange_state(), 0);
        mempool_.push_back(result.burn_tx);
        log_event({{"type", "td_burn_for_leecher"},
                   {"account", spec.name},
                   {"td_burned", result.td_burned},
                   {"minted", result.minted}});
    }

    if (spec.role == Role::Owner) {
        std::vector<ChunkId> chunks;
        for (std::uint64_t i = 0; i < spec.chunks; ++i) {
            ChunkId id = chunk_owner_.empty() ? 0 : chunk_owner_.rbegin()->first + 1;
            chunk_owner_[id] = node_index_.at(node.keys.public_key);
            chunks.push_back(id);
        }
        market_.submit_hosting_request(node.keys, ledger_, chunks, 0);
        log_event({{"type", "hosting_request"},
                   {"owner", spec.name},
                   {"chunks", chunks.size()}});
    } else if (spec.role == Role::Seeder || spec.role == Role::Hybrid) {
        std::uint64_t tokens = ledger_.leecher_balance(node.keys.public_key);
        if (tokens > 0) {
            auto cap = market_.register_capacity(node.keys, ledger_, tokens, 0);
            log_event({{"type", "capacity_registered"},
                       {"seeder", spec.name},
                       {"tokens", tokens},
                       {"credits", cap.capacity_credits}});
        }
    }
}

// -- hosting pipeline -------------------------------------------------------

void Simulation::run_match() {
    std::vector<ChunkId> matched = market_.match();
    std::sort(matched.begin(), matched.end());
    for (ChunkId chunk : matched) {
        const HostingAssignment* asg = market_.assignment(chunk);
        for (const PubKey& seeder : asg->seeders)
            if (!pairs_.count({chunk, seeder})) install_pair(chunk, seeder);
        log_event({{"type", "assigned"},
                   {"chunk", chunk},
                   {"seeders", static_cast<std::uint64_t>(asg->seeders.size())}});
        TrackerRecord tracker = market_.publish_tracker(chunk);
        pending_trackers_.push_back(tracker);
        log_event({{"type", "tracker"}, {"chunk", chunk}});
    }
}

void Simulation::install_pair(ChunkId chunk, const PubKey& seeder_pub) {
    SimNode& owner = nodes_[chunk_owner_.at(chunk)];
    SimNode& seeder = node_of(seeder_pub);

    Digest nonce;
    for (int i = 0; i < 4; ++i) {
        std::uint64_t x = nonce_rng_.next_u64();
        for (int b = 0; b < 8; ++b)
            nonce[8 * i + b] = static_cast<std::uint8_t>(x >> (8 * b));
    }
    std::vector<std::uint8_t> data = chunk_data(chunk);
    Payload payload = build_payload(owner.keys, as_bytes(data), seeder_pub, nonce);

    seeder.leaves[chunk] = split_leaves(as_bytes(payload.ciphertext), config_.leaf_size);

    PairState ps;
    ps.commitment = commit_chunk(chunk, seeder_pub, payload, config_.leaf_size);
    ps.retained_prefixes =
        retain_leaf_prefixes(payload, config_.leaf_size, config_.liveness_len);
    market_.record_commitment(chunk, seeder_pub, ps.commitment.merkle_root);

    ChallengeParams params{config_.k_leaves, config_.response_window,
                           config_.mean_challenge_interval, config_.liveness_len};
    DetRng chal_rng = DetRng::derive(
        config_.seed, "chal/" + std::to_string(chunk) + "/" + to_hex(seeder_pub));
    auto scheduled = schedule_challenges(chal_rng, ps.commitment, params, now_ + 1,
                                         challenge_end(), next_challenge_id_);
    for (const Challenge& c : scheduled) {
        challenges_[c.challenge_id] = c;
        schedule(c.issued_at, EvKind::ChallengeIssue, c.challenge_id);
    }
    pairs_[{chunk, seeder_pub}] = std::move(ps);
}

// -- challenge lifecycle ----------------------------------------------------

void Simulation::on_challenge_issue(std::uint64_t challenge_id) {
    const Challenge& c = challenges_.at(challenge_id);
    auto pit = pairs_.find({c.chunk_id, c.seeder});
    if (pit == pairs_.end() || !pit->second.active) return;
    SimNode& seeder = node_of(c.seeder);
    const NodePolicy& policy = seeder.spec.policy;

    ++challenges_issued_;
    log_event({{"type", "challenge"},
               {"id", challenge_id},
               {"chunk", c.chunk_id},
               {"seeder", seeder.spec.name},
               {"deadline", c.deadline}});

    std::optional<ProofResponse> response;
    Tick responded_at = c.issued_at + config_.response_latency + message_delay();

    switch (policy.kind) {
        case PolicyKind::Honest:
        case PolicyKind::Equivocator:
            response = respond(c, seeder.leaves.at(c.chunk_id),
                               [](std::uint32_t) { return true; },
                               config_.liveness_len, responded_at);
            break;
        case PolicyKind::OfflineAfter:
            if (c.issued_at < policy.offline_after)
                response = respond(c, seeder.leaves.at(c.chunk_id),
                                   [](std::uint32_t) { return true; },
                                   config_.liveness_len, responded_at);
            break;
        case PolicyKind::DiscardFraction: {
            // Memoryless retention: each challenged leaf is independently
            // present with probability 1 - f.
            double f = policy.discard_fraction;
            response = respond(c, seeder.leaves.at(c.chunk_id),
                               [&](std::uint32_t) { return !seeder.rng.bernoulli(f); },
                               config_.liveness_len, responded_at);
            break;
        }
        case PolicyKind::PayloadSwapper: {
            // Answers from another seeder's payload of the same chunk; the
            // per-seeder keystream makes this fail against its own root.
            const HostingAssignment* asg = market_.assignment(c.chunk_id);
            for (const PubKey& other : asg->seeders) {
                if (other == c.seeder) continue;
                SimNode& victim = node_of(other);
                auto lit = victim.leaves.find(c.chunk_id);
                if (lit == victim.leaves.end()) continue;
                response = respond(c, lit->second, [](std::uint32_t) { return true; },
                                   config_.liveness_len, responded_at);
                break;
            }
            break;
        }
    }

    Tick resolve_at = response ? response->responded_at : c.deadline + 1;
    planned_[challenge_id] = std::move(response);
    schedule(resolve_at, EvKind::Resolve, challenge_id);
}

void Simulation::on_resolve(std::uint64_t challenge_id) {
    const Challenge& c = challenges_.at(challenge_id);
    auto pit = pairs_.find({c.chunk_id, c.seeder});
    auto plan = planned_.find(challenge_id);
    if (plan == planned_.end()) return;
    std::optional<ProofResponse> response = std::move(plan->second);
    planned_.erase(plan);
    if (pit == pairs_.end() || !pit->second.active) return;
    PairState& ps = pit->second;

    ProofFail verdict = ProofFail::Late; // no response by the deadline
    if (response)
        verdict = verify_response(c, *response, ps.commitment, ps.retained_prefixes,
                                  response->responded_at);
    bool pass = verdict == ProofFail::None;

    book_.record(c.seeder, c.chunk_id, pass);
    SimNode& seeder = node_of(c.seeder);
    if (pass) {
        ++challenges_passed_;
    } else {
        ++challenges_failed_;
        ++fail_reasons_[proof_fail_name(verdict)];
        if (seeder.spec.policy.kind != PolicyKind::Honest &&
            !first_detection_.count(seeder.spec.name))
            first_detection_[seeder.spec.name] = now_;
    }
    log_event({{"type", "challenge_result"},
               {"id", challenge_id},
               {"chunk", c.chunk_id},
               {"seeder", seeder.spec.name},
               {"pass", pass},
               {"reason", proof_fail_name(verdict)}});

    if (!pass) {
        ++ps.failures;
        if (ps.failures >= config_.grace_failures) {
            ps.active = false;
            ++dropouts_;
            market_.handle_dropout(c.chunk_id, c.seeder, ledger_, now_);
            drain_token_log();
            log_event({{"type", "dropout"},
                       {"chunk", c.chunk_id},
                       {"seeder", seeder.spec.name}});
        }
    }
}

// -- consensus rounds -------------------------------------------------------

void Simulation::do_equivocation_round(Tick t, SimNode& winner) {
    std::uint64_t height = chain_->tip_height() + 1;
    std::vector<Transaction> txs(mempool_.begin(), mempool_.end());
    Block b1 = chain_->build_block(chain_->tip(), t, winner.keys.public_key, txs, {}, {});
    // Distinct timestamp guarantees two distinct hashes at the same height
    // even with an empty mempool.
    Block b2 = chain_->build_block(chain_->tip(), t + 1, winner.keys.public_key, {}, {}, {});

    std::vector<SignedHeader> headers;
    for (const Block* b : {&b1, &b2}) {
        auto msg = SignedHeader::signing_message(height, b->hash);
        headers.push_back({height, b->hash, winner.keys.public_key,
                           scheme_->sign(winner.keys.secret_key, as_bytes(msg))});
    }

    std::vector<PubKey> offenders = detect_equivocation(headers, *scheme_);
    json slashed_names = json::array();
    for (const PubKey& offender : offenders) {
        slash(*pool_, ledger_, offender, t);
        slashed_.push_back(offender);
        slashed_names.push_back(node_name(offender));
        drain_token_log();
        log_event({{"type", "slash"}, {"account", node_name(offender)}});
    }
    // Round voided: no block reaches the chain, the mempool carries over.
    ++pool_->round;
    ++rounds_;
    log_event({{"type", "round"},
               {"round", pool_->round - 1},
               {"selected", winner.spec.name},
               {"accepted", false},
               {"slashed", slashed_names}});
}

void Simulation::on_block(Tick t) {
    for (auto& node : nodes_) {
        if (node.spec.role != Role::Validator && node.spec.role != Role::Hybrid) continue;
        const PubKey& pub = node.keys.public_key;
        if (pool_->barred.count(pub) || pool_->entries.count(pub)) continue;
        if (ledger_.seed_bonus_balance(pub) == 0) continue;
        register_stake(*pool_, ledger_, pub, t);
    }

    if (pool_->total_staked() == 0) {
        ++round_skips_;
        log_event({{"type", "round_skipped"}});
        run_match();
        record_supply_point(t);
        return;
    }

    PubKey winner_pub = select_validator(*pool_);
    ++selections_[winner_pub];
    SimNode& winner = node_of(winner_pub);

    if (winner.spec.policy.kind == PolicyKind::Equivocator) {
        do_equivocation_round(t, winner);
        run_match();
        record_supply_point(t);
        return;
    }

    std::size_t n_txs = std::min<std::size_t>(mempool_.size(), config_.max_txs - 1);
    std::vector<Transaction> txs(mempool_.begin(), mempool_.begin() + n_txs);
    ProofCheckpoint cp = book_.make_checkpoint(last_checkpoint_, t);
    Block block = chain_->build_block(chain_->tip(), t, winner_pub, txs,
                                      pending_trackers_, {cp});
    RoundOutcome outcome =
        finalize_round(*pool_, ledger_, *chain_, winner_pub, gamma_, block, t);
    ++rounds_;
    drain_token_log();
    log_event({{"type", "round"},
               {"round", outcome.round},
               {"selected", winner.spec.name},
               {"accepted", outcome.block_accepted},
               {"burned", outcome.burned},
               {"returned", outcome.returned},
               {"block", to_hex(outcome.block).substr(0, 16)}});

    if (outcome.block_accepted) {
        ++blocks_accepted_;
        mempool_.erase(mempool_.begin(), mempool_.begin() + n_txs);
        pending_trackers_.clear();
        last_checkpoint_ = t;

        json results = json::array();
        for (const auto& entry : cp.results) {
            results.push_back({{"seeder", node_name(entry.seeder)},
                               {"chunk", entry.chunk_id},
                               {"passed", entry.challenges_passed},
                               {"failed", entry.challenges_failed}});
            std::uint64_t award =
                static_cast<std::uint64_t>(entry.challenges_passed) * config_.bonus_per_pass;
            if (award > 0)
                ledger_.award_seed_bonus(entry.seeder, award, t, "checkpoint");
        }
        drain_token_log();
        log_event({{"type", "checkpoint"},
                   {"from", cp.from_tick},
                   {"to", cp.to_tick},
                   {"results", results}});
    }

    run_match();
    record_supply_point(t);
}

void Simulation::on_term_end(Tick t) {
    for (auto& node : nodes_) {
        if (node.spec.role != Role::Owner) continue;
        market_.settle_owner_escrow(node.keys.public_key, ledger_, config_.escrow_refund, t);
    }
    drain_token_log();
    log_event({{"type", "term_settled"}, {"refund", config_.escrow_refund}});
}

// -- loop -------------------------------------------------------------------

void Simulation::dispatch(const SimEvent& ev) {
    switch (ev.kind) {
        case EvKind::Block: on_block(ev.at); break;
        case EvKind::ChallengeIssue: on_challenge_issue(ev.arg); break;
        case EvKind::Resolve: on_resolve(ev.arg); break;
        case EvKind::TermEnd: on_term_end(ev.at); break;
    }
}

void Simulation::advance(Tick until) {
    if (until < now_) fail(Err::ConfigInvalid, "advance target is in the past");
    while (!queue_.empty() && queue_.begin()->at <= until) {
        SimEvent ev = *queue_.begin();
        queue_.erase(queue_.begin());
        now_ = ev.at;
        dispatch(ev);
    }
    now_ = until;
}

void Simulation::run() {
    advance(config_.horizon_ticks);
    if (finalized_) return;
    finalized_ = true;

    // A term equal to the horizon settles here instead of via an event.
    if (config_.hosting_term_ticks == 0 ||
        config_.hosting_term_ticks >= config_.horizon_ticks)
        on_term_end(now_);

    json summary;
    summary["type"] = "summary";
    summary["block_reward"] = config_.block_reward;
    summary["bonus_per_pass"] = config_.bonus_per_pass;
    summary["replication"] = config_.replication;
    summary["genesis_td"] = chain_->genesis_allocation();
    summary["rounds"] = rounds_;
    summary["blocks_accepted"] = blocks_accepted_;
    summary["chain_height"] = chain_->tip_height();
    summary["td_supply"] = chain_->utxo_sum();
    summary["td_burned_onchain"] = chain_->burned_td();
    summary["fees_destroyed"] = chain_->fees_destroyed();
    summary["pending_txs"] = mempool_.size();
    summary["leecher_balances"] = ledger_.total_leecher_balance();
    summary["owner_escrow"] = market_.owner_escrow_total();
    summary["seeder_escrow_credits"] = market_.seeder_escrow_credits();
    summary["seed_bonus_balances"] = ledger_.total_seed_bonus_balance();
    summary["seed_bonus_staked"] = pool_->total_staked();
    summary["challenges_issued"] = challenges_issued_;
    summary["challenges_passed"] = challenges_passed_;
    summary["challenges_failed"] = challenges_failed_;
    summary["degraded_assignments"] = market_.degraded_count();
    log_event(summary);
}

// -- reporting --------------------------------------------------------------

void Simulation::record_supply_point(Tick t) {
    supply_series_.push_back({{"tick", t},
                              {"td", chain_->utxo_sum()},
                              {"leecher", ledger_.total_leecher_balance()},
                              {"seed_bonus", ledger_.total_seed_bonus_balance() +
                                                 pool_->total_staked()}});
}

json Simulation::conservation_checks() const {
    json out;
    out["td"] = chain_->utxo_sum() ==
                chain_->genesis_allocation() + blocks_accepted_ * config_.block_reward -
                    chain_->burned_td() - chain_->fees_destroyed();

    std::uint64_t r = config_.replication;
    std::uint64_t lhs = ledger_.minted("leecher") * r;
    std::uint64_t rhs = ledger_.burned("leecher") * r + ledger_.burned("leecher_credit") +
                        ledger_.total_leecher_balance() * r +
                        market_.owner_escrow_total() * r + market_.seeder_escrow_credits();
    out["leecher"] = lhs == rhs;

    out["seed_bonus"] = ledger_.minted("seed_bonus") - ledger_.burned("seed_bonus") ==
                        ledger_.total_seed_bonus_balance() + pool_->total_staked();
    return out;
}

json Simulation::metrics_json() const {
    json m;
    m["chain_height"] = chain_->tip_height();
    m["rounds"] = rounds_;
    m["round_skips"] = round_skips_;
    m["blocks_accepted"] = blocks_accepted_;
    json sel = json::object();
    for (const auto& [pub, count] : selections_) sel[node_name(pub)] = count;
    m["selection_counts"] = sel;
    m["challenges"] = {{"issued", challenges_issued_},
                       {"passed", challenges_passed_},
                       {"failed", challenges_failed_},
                       {"fail_reasons", fail_reasons_}};
    json det = json::object();
    for (const auto& [name, tick] : first_detection_) det[name] = tick;
    m["first_detection"] = det;
    m["dropouts"] = dropouts_;
    m["degraded_assignments"] = market_.degraded_count();
    json slashed = json::array();
    for (const auto& pub : slashed_) slashed.push_back(node_name(pub));
    m["slashed"] = slashed;
    m["supplies"] = {{"td", chain_->utxo_sum()},
                     {"leecher", ledger_.total_leecher_balance()},
                     {"seed_bonus_liquid", ledger_.total_seed_bonus_balance()},
                     {"seed_bonus_staked", pool_->total_staked()}};
    m["supply_series"] = supply_series_;
    m["conservation"] = conservation_checks();
    return m;
}

std::string Simulation::events_jsonl() const {
    std::string out;
    for (const auto& line : event_log_) {
        out += line;
        out += '\n';
    }
    return out;
}

Digest Simulation::state_digest() const {
    serial::Writer w;
    w.digest(chain_->state_digest());
    w.u64(now_);
    w.u64(next_seq_);
    w.u64(next_challenge_id_);
    for (const auto& ev : queue_) {
        w.u64(ev.at);
        w.u64(ev.seq);
        w.u8(static_cast<std::uint8_t>(ev.kind));
        w.u64(ev.arg);
    }
    for (const auto& [pub, bal] : ledger_.leecher_balances()) {
        w.digest(pub);
        w.u64(bal);
    }
    for (const auto& [pub, bal] : ledger_.seed_bonus_balances()) {
        w.digest(pub);
        w.u64(bal);
    }
    for (const auto& [pub, stake] : pool_->entries) {
        w.digest(pub);
        w.u64(stake);
    }
    w.u64(pool_->round);
    w.u64(pool_->rng.state());
    w.u64(market_.owner_escrow_total());
    w.u64(market_.seeder_escrow_credits());
    w.u64(market_.forfeited_credits_total());
    w.u64(market_.pending_demand_mb());
    w.u64(delay_rng_.state());
    w.u64(nonce_rng_.state());
    for (const auto& n : nodes_) w.u64(n.rng.state());
    w.u64(challenges_issued_);
    w.u64(challenges_passed_);
    w.u64(challenges_failed_);
    w.u64(rounds_);
    w.u64(blocks_accepted_);
    w.u64(static_cast<std::uint64_t>(mempool_.size()));
    w.u64(static_cast<std::uint64_t>(event_log_.size()));
    w.u64(static_cast<std::uint64_t>(ledger_.mint_log().size()));
    w.u64(static_cast<std::uint64_t>(ledger_.burn_log().size()));
    return sha256(as_bytes(w.data()));
}

RunOutputs run_scenario(const ScenarioConfig& config) {
    Simulation sim(config);
    sim.run();
    return {sim.metrics_json(), sim.events_jsonl(), sim.burn_log_csv()};
}

} // namespace tdsim
