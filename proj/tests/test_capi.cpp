// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "tdsim.h"

namespace {

const char* kConfig = R"({
  "seed": 5,
  "horizon_ticks": 150,
  "mean_challenge_interval": 10.0,
  "nodes": [
    {"name": "s1", "role": "seeder", "td": 10, "burn_td": 8},
    {"name": "s2", "role": "seeder", "td": 10, "burn_td": 8},
    {"name": "s3", "role": "seeder", "td": 10, "burn_td": 8},
    {"name": "s4", "role": "seeder", "td": 10, "burn_td": 8},
    {"name": "s5", "role": "seeder", "td": 10, "burn_td": 8},
    {"name": "owner", "role": "owner", "td": 20, "burn_td": 10, "chunks": 4},
    {"name": "v1", "role": "validator", "seed_bonus": 5},
    {"name": "v2", "role": "validator", "seed_bonus": 5}
  ]
})";

struct TempDir {
    std::filesystem::path path;
    TempDir() : path(std::filesystem::temp_directory_path() / "tdsim_capi_test") {
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("config parse, bad field reporting and overrides") {
    td_config* config = nullptr;
    REQUIRE(td_config_parse(kConfig, &config) == 0);
    CHECK(td_config_validate(config) == 0);

    CHECK(td_config_override(config, "gamma", "0.25") == 0);
    CHECK(td_config_override(config, "bogus", "1") == 1);
    CHECK(std::string(td_last_error()).find("bogus") != std::string::npos);
    CHECK(td_config_override(config, "replication", "0") == 1);
    CHECK(std::string(td_last_error()) == "R must be >= 1 (replication)");
    td_config_free(config);

    td_config* bad = nullptr;
    CHECK(td_config_parse("{\"replication\": 0}", &bad) == 1);
    CHECK(std::string(td_last_error()) == "R must be >= 1 (replication)");
    CHECK(td_config_load("/nonexistent/config.json", &bad) == 1);
}

TEST_CASE("run, outputs on disk and audit round-trip") {
    td_config* config = nullptr;
    REQUIRE(td_config_parse(kConfig, &config) == 0);
    td_sim* sim = nullptr;
    REQUIRE(td_sim_create(config, &sim) == 0);
    REQUIRE(td_sim_run(sim) == 0);
    CHECK(td_sim_now(sim) == 150);

    TempDir dir;
    REQUIRE(td_sim_write_outputs(sim, dir.path.c_str()) == 0);
    CHECK(std::filesystem::exists(dir.path / "metrics.json"));
    CHECK(std::filesystem::exists(dir.path / "events.jsonl"));
    CHECK(std::filesystem::exists(dir.path / "burn_log.csv"));

    char* metrics = td_sim_metrics_json(sim);
    REQUIRE(metrics != nullptr);
    CHECK(std::string(metrics).find("\"conservation\"") != std::string::npos);
    td_string_free(metrics);

    char* violation = nullptr;
    CHECK(td_audit_events_file((dir.path / "events.jsonl").c_str(), &violation) == 0);
    CHECK(violation == nullptr);
    CHECK(td_audit_events_file("/nonexistent/events.jsonl", &violation) == 1);

    td_sim_free(sim);
    td_config_free(config);
}

TEST_CASE("seed override changes the run, reruns reproduce it") {
    auto events_for = [&](uint64_t seed) {
        td_config* config = nullptr;
        REQUIRE(td_config_parse(kConfig, &config) == 0);
        REQUIRE(td_config_set_seed(config, seed) == 0);
        td_sim* sim = nullptr;
        REQUIRE(td_sim_create(config, &sim) == 0);
        REQUIRE(td_sim_run(sim) == 0);
        char* events = td_sim_events_jsonl(sim);
        REQUIRE(events != nullptr);
        std::string out(events);
        td_string_free(events);
        td_sim_free(sim);
        td_config_free(config);
        return out;
    };
    std::string a = events_for(100);
    std::string b = events_for(100);
    std::string c = events_for(101);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("stepped advancement matches one run via the state digest") {
    td_config* config = nullptr;
    REQUIRE(td_config_parse(kConfig, &config) == 0);

    td_sim* whole = nullptr;
    td_sim* steps = nullptr;
    REQUIRE(td_sim_create(config, &whole) == 0);
    REQUIRE(td_sim_create(config, &steps) == 0);
    REQUIRE(td_sim_advance(whole, 150) == 0);
    REQUIRE(td_sim_advance(steps, 75) == 0);
    CHECK(td_sim_advance(steps, 20) == 1); // backwards is a bad input
    REQUIRE(td_sim_advance(steps, 150) == 0);

    char a[65], b[65];
    REQUIRE(td_sim_state_digest(whole, a) == 0);
    REQUIRE(td_sim_state_digest(steps, b) == 0);
    CHECK(std::string(a) == std::string(b));

    td_sim_free(whole);
    td_sim_free(steps);
    td_config_free(config);
}
