// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#ifndef TDSIM_AUDIT_HPP
#define TDSIM_AUDIT_HPP

#include <optional>
#include <string>

namespace tdsim {

struct AuditResult {
    bool ok = true;
    std::string violation; // first violated invariant, empty when ok
};

// Recomputes the conservation invariants from an events.jsonl document and
// checks them against the final summary record. Works purely off the log,
// so a tampered line surfaces as a violation.
AuditResult audit_events(const std::string& events_jsonl);
AuditResult audit_events_file(const std::string& path);

} // namespace tdsim

#endif
