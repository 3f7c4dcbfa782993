// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "diffcost/ts.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace diffcost {

/// Raised when run enumeration exceeds its step budget. With the standing
/// termination assumption this signals either a non-terminating input or a
/// budget that is too small.
struct StepBudgetExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Limits for exhaustive run enumeration. All nondeterminism is resolved by
/// enumerating finite integer ranges: declared update bounds when present,
/// `default_nondet` otherwise (a test-only convention; the analyzer itself
/// treats unbounded nondeterminism soundly).
struct RunBudget {
    std::int64_t max_steps = 100000; // per-run depth limit
    std::pair<std::int64_t, std::int64_t> default_nondet{-2, 2};
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> input_box;
    std::int64_t state_cap = 2000000; // total distinct states explored
};

/// Derives an input box from Theta0's interval projection: every variable
/// with finite derived bounds is clamped to at most `width` consecutive
/// values; unconstrained variables default to [0, width-1]; cost is pinned
/// to 0.
RunBudget derive_budget(const TransitionSystem& ts, std::int64_t width);

/// All integer points of the budget's input box that satisfy Theta0.
std::vector<Valuation> initial_points(const TransitionSystem& ts, const RunBudget& budget);

struct CostExtremes {
    std::int64_t inf;
    std::int64_t sup;
};

/// Exact minimal/maximal total cost over every run from x0, by exhaustive
/// memoized search over nondeterministic choices.
CostExtremes cost_extremes(const TransitionSystem& ts, const Valuation& x0,
                           const RunBudget& budget);

/// Exact maximum of CostSup_new(x) - CostInf_old(x) over the input box.
std::int64_t max_diff(const TransitionSystem& ts_new, const TransitionSystem& ts_old,
                      const RunBudget& budget);

/// Every reachable (location, state) pair from the budget's initial points,
/// up to `budget.state_cap` states.
std::vector<std::pair<std::string, Valuation>>
enumerate_reachable(const TransitionSystem& ts, const RunBudget& budget);

} // namespace diffcost
