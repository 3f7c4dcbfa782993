// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "diffcost/lp.hpp"
#include "diffcost/oracle.hpp"

#include <optional>
#include <string>
#include <vector>

namespace diffcost {

struct WitnessCheck {
    bool pass = true;
    std::vector<std::string> failures;
    std::int64_t points_checked = 0;
};

/// Replays a solved witness against exhaustive run enumeration on the
/// budget's input box: the upper polynomial must dominate every run cost,
/// the lower one undercut it, and the mode's closing inequality must hold
/// (threshold, symbolic bound, precision, or strict refutation margin at the
/// refutation input). Failures carry a counterexample valuation.
WitnessCheck check_witness(const Witness& w, const TransitionSystem& ts_new,
                           const TransitionSystem& ts_old, const RunBudget& budget,
                           const std::optional<Polynomial>& verify_bound = {},
                           const std::optional<Valuation>& refute_x0 = {});

} // namespace diffcost
