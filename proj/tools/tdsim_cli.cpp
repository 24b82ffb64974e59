// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tdsim.h"

namespace {

int report(int code) {
    if (code != 0) std::fprintf(stderr, "error: %s\n", td_last_error());
    return code;
}

// Builds a configured handle from the common run/validate flags; returns
// nullptr (with the exit code in *code) on failure.
td_config* load_config(const std::string& path, bool has_seed, std::uint64_t seed,
                       const std::vector<std::string>& overrides, int* code) {
    td_config* config = nullptr;
    *code = report(td_config_load(path.c_str(), &config));
    if (*code != 0) return nullptr;
    for (const auto& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "error: override \"%s\" is not key=value\n", kv.c_str());
            td_config_free(config);
            *code = 1;
            return nullptr;
        }
        *code = report(
            td_config_override(config, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
        if (*code != 0) {
            td_config_free(config);
            return nullptr;
        }
    }
    if (has_seed) td_config_set_seed(config, seed);
    *code = report(td_config_validate(config));
    if (*code != 0) {
        td_config_free(config);
        return nullptr;
    }
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Torrent-driven blockchain simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::string events_path;
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::vector<std::string> overrides;
    bool quick = false;
    int criterion = 0;

    auto* run = app.add_subcommand("run", "Run a scenario and write its reports");
    run->add_option("-c,--config", config_path, "Scenario config (JSON)")->required();
    run->add_option("-o,--output", output_dir, "Output directory")->required();
    run->add_option("--seed", seed, "Seed override")->each([&](const std::string&) {
        has_seed = true;
    });
    run->add_option("--override", overrides, "key=value config override (repeatable)");

    auto* validate = app.add_subcommand("validate", "Check a scenario config");
    validate->add_option("-c,--config", config_path, "Scenario config (JSON)")->required();
    validate->add_option("--override", overrides, "key=value config override (repeatable)");

    auto* audit = app.add_subcommand("audit", "Recheck conservation invariants from a log");
    audit->add_option("-e,--events", events_path, "events.jsonl produced by run")->required();

    auto* acceptance = app.add_subcommand("acceptance", "Run the built-in acceptance suite");
    acceptance->add_flag("--quick", quick, "Reduced sample sizes");
    acceptance->add_option("--criterion", criterion, "Run a single criterion (1..10)")
        ->check(CLI::Range(1, 10));

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        int code = 0;
        td_config* config = load_config(config_path, has_seed, seed, overrides, &code);
        if (!config) return code;
        td_sim* sim = nullptr;
        code = report(td_sim_create(config, &sim));
        if (code == 0) code = report(td_sim_run(sim));
        if (code == 0) code = report(td_sim_write_outputs(sim, output_dir.c_str()));
        td_sim_free(sim);
        td_config_free(config);
        return code;
    }

    if (validate->parsed()) {
        int code = 0;
        td_config* config = load_config(config_path, false, 0, overrides, &code);
        if (!config) return code;
        std::printf("ok\n");
        td_config_free(config);
        return 0;
    }

    if (audit->parsed()) {
        char* violation = nullptr;
        int code = td_audit_events_file(events_path.c_str(), &violation);
        if (code == 0) {
            std::printf("ok\n");
        } else if (violation) {
            std::fprintf(stderr, "violated: %s\n", violation);
            td_string_free(violation);
        } else {
            std::fprintf(stderr, "error: %s\n", td_last_error());
        }
        return code;
    }

    return td_acceptance_run(criterion, quick ? 1 : 0);
}
