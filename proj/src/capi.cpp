// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#include "tdsim.h"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "acceptance.hpp"
#include "audit.hpp"
#include "scenario.hpp"
#include "simnet.hpp"

namespace {

thread_local std::string g_last_error;

int fail_code(const tdsim::TdError& e) {
    g_last_error = e.what();
    switch (e.code()) {
        case tdsim::Err::ConfigInvalid:
        case tdsim::Err::Io:
        case tdsim::Err::UnknownNode:
            return 1;
        default:
            return 2;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

tdsim::ScenarioConfig* unwrap(td_config* c) {
    return reinterpret_cast<tdsim::ScenarioConfig*>(c);
}
const tdsim::ScenarioConfig* unwrap(const td_config* c) {
    return reinterpret_cast<const tdsim::ScenarioConfig*>(c);
}
tdsim::Simulation* unwrap(td_sim* s) { return reinterpret_cast<tdsim::Simulation*>(s); }
const tdsim::Simulation* unwrap(const td_sim* s) {
    return reinterpret_cast<const tdsim::Simulation*>(s);
}

template <typename F>
int guarded(F&& f) {
    try {
        f();
        return 0;
    } catch (const tdsim::TdError& e) {
        return fail_code(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return 2;
    }
}

} // namespace

extern "C" {

const char* td_last_error(void) { return g_last_error.c_str(); }

void td_string_free(char* s) { std::free(s); }

int td_config_load(const char* path, td_config** out) {
    return guarded([&] {
        auto* cfg = new tdsim::ScenarioConfig(tdsim::ScenarioConfig::from_file(path));
        *out = reinterpret_cast<td_config*>(cfg);
    });
}

int td_config_parse(const char* json_text, td_config** out) {
    return guarded([&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(json_text);
        } catch (const nlohmann::json::exception& e) {
            tdsim::fail(tdsim::Err::ConfigInvalid,
                        std::string("config is not valid JSON: ") + e.what());
        }
        auto* cfg = new tdsim::ScenarioConfig(tdsim::ScenarioConfig::from_json(j));
        *out = reinterpret_cast<td_config*>(cfg);
    });
}

int td_config_override(td_config* config, const char* key, const char* value) {
    return guarded([&] { unwrap(config)->apply_override(key, value); });
}

int td_config_set_seed(td_config* config, uint64_t seed) {
    return guarded([&] { unwrap(config)->seed = seed; });
}

int td_config_validate(const td_config* config) {
    return guarded([&] { unwrap(config)->validate(); });
}

void td_config_free(td_config* config) { delete unwrap(config); }

int td_sim_create(const td_config* config, td_sim** out) {
    return guarded([&] {
        auto* sim = new tdsim::Simulation(*unwrap(config));
        *out = reinterpret_cast<td_sim*>(sim);
    });
}

int td_sim_advance(td_sim* sim, uint64_t until_tick) {
    return guarded([&] { unwrap(sim)->advance(until_tick); });
}

int td_sim_run(td_sim* sim) {
    return guarded([&] { unwrap(sim)->run(); });
}

uint64_t td_sim_now(const td_sim* sim) { return unwrap(sim)->now(); }

int td_sim_state_digest(const td_sim* sim, char hex_out[65]) {
    return guarded([&] {
        std::string hex = tdsim::to_hex(unwrap(sim)->state_digest());
        std::memcpy(hex_out, hex.c_str(), 65);
    });
}

char* td_sim_metrics_json(const td_sim* sim) {
    try {
        return dup_string(unwrap(sim)->metrics_json().dump(2) + "\n");
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return nullptr;
    }
}

char* td_sim_events_jsonl(const td_sim* sim) {
    try {
        return dup_string(unwrap(sim)->events_jsonl());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return nullptr;
    }
}

char* td_sim_burn_log_csv(const td_sim* sim) {
    try {
        return dup_string(unwrap(sim)->burn_log_csv());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return nullptr;
    }
}

int td_sim_write_outputs(const td_sim* sim, const char* dir) {
    return guarded([&] {
        namespace fs = std::filesystem;
        fs::create_directories(dir);
        auto write = [&](const char* name, const std::string& content) {
            std::ofstream out(fs::path(dir) / name, std::ios::binary);
            if (!out) tdsim::fail(tdsim::Err::Io, std::string("cannot write ") + name);
            out << content;
        };
        const tdsim::Simulation* s = unwrap(sim);
        write("metrics.json", s->metrics_json().dump(2) + "\n");
        write("events.jsonl", s->events_jsonl());
        write("burn_log.csv", s->burn_log_csv());
    });
}

void td_sim_free(td_sim* sim) { delete unwrap(sim); }

int td_audit_events_file(const char* path, char** violation_out) {
    if (violation_out) *violation_out = nullptr;
    try {
        tdsim::AuditResult result = tdsim::audit_events_file(path);
        if (result.ok) return 0;
        if (violation_out) *violation_out = dup_string(result.violation);
        g_last_error = result.violation;
        return 2;
    } catch (const tdsim::TdError& e) {
        return fail_code(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return 2;
    }
}

int td_acceptance_run(int criterion, int quick) {
    try {
        std::vector<tdsim::CriterionResult> results;
        if (criterion == 0)
            results = tdsim::run_acceptance(quick != 0);
        else
            results.push_back(tdsim::run_criterion(criterion, quick != 0));
        bool all = true;
        for (const auto& r : results) {
            std::printf("%s criterion %d: %s", r.pass ? "PASS" : "FAIL", r.id,
                        r.name.c_str());
            if (!r.detail.empty()) std::printf(" (%s)", r.detail.c_str());
            std::printf("\n");
            all = all && r.pass;
        }
        std::fflush(stdout);
        return all ? 0 : 2;
    } catch (const tdsim::TdError& e) {
        return fail_code(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return 2;
    }
}

} // extern "C"
