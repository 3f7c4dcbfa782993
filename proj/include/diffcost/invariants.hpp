// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "diffcost/oracle.hpp"
#include "diffcost/ts.hpp"

#include <map>
#include <optional>
#include <string>

namespace diffcost {

/// Per-location affine over-approximation of the reachable states. Every
/// location of the target system has an entry; the empty conjunct list is
/// the trivial invariant true.
struct InvariantMap {
    std::map<std::string, Assertion> at;

    const Assertion& of(const std::string& loc) const {
        static const Assertion trivial{};
        auto it = at.find(loc);
        return it == at.end() ? trivial : it->second;
    }
};

struct PropagateOptions {
    int widen_after = 5; // joins at a location before widening kicks in
};

/// Forward interval fixpoint seeded with Theta0, refined through guards,
/// pushed through updates, widened after `widen_after` visits and narrowed
/// once. Theta0 conjuncts over never-written variables pass through verbatim
/// to every location. The result over-approximates the reachable states of a
/// terminating system; it may be weak, never unsound.
InvariantMap propagate_intervals(const TransitionSystem& ts, const PropagateOptions& opt = {});

/// Per-location conjunction of both inputs, syntactically deduplicated.
/// Requires identical location sets.
InvariantMap merge_annotations(const InvariantMap& base, const InvariantMap& user);

/// Parses the user annotation format, keeping untagged lines and lines tagged
/// with `system_tag`:
///   invariant l1: x >= 0, n - x >= 0;
///   invariant new l2: lenA - j >= 0;
InvariantMap parse_invariant_file(const std::string& text, const std::string& system_tag);

/// Completes a sparse map to one entry per system location; rejects entries
/// for unknown locations and invariants over unknown variables.
InvariantMap complete_invariants(const TransitionSystem& ts, const InvariantMap& sparse);

struct InvariantViolation {
    std::string location;
    Valuation state;
    std::string conjunct;
};

struct InvariantCheckReport {
    bool ok = true;
    std::optional<InvariantViolation> violation;
    std::int64_t states_checked = 0;
};

/// Enumerates reachable states within the budget and reports the first state
/// violating the claimed invariant. A violation proves the input is not an
/// invariant; absence of violations is advisory only.
InvariantCheckReport check_invariant_sampled(const TransitionSystem& ts, const InvariantMap& inv,
                                             std::int64_t state_budget, const RunBudget& rb);

} // namespace diffcost
