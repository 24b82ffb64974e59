// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#ifndef TDSIM_ACCEPTANCE_HPP
#define TDSIM_ACCEPTANCE_HPP

#include <string>
#include <vector>

namespace tdsim {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

inline constexpr int kCriterionCount = 10;

// Runs one criterion (1-based). quick trades sample size for speed while
// keeping every exact check exact.
CriterionResult run_criterion(int id, bool quick);
std::vector<CriterionResult> run_acceptance(bool quick);

} // namespace tdsim

#endif
