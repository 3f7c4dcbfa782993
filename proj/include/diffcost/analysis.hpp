// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "diffcost/invariants.hpp"
#include "diffcost/lp.hpp"
#include "diffcost/parse.hpp"

#include <map>
#include <optional>
#include <string>

namespace diffcost {

struct AnalysisOptions {
    int degree = 2;
    int prodk = -1; // -1: follow degree
    bool include_cost_in_templates = false;
    Rational eps = Rational(1);
    std::string solver = "exact";
    std::string emit_lp_path;
    int widen_after = 5;
    long pivot_cap = 1000000;

    int effective_k() const { return prodk < 0 ? degree : prodk; }
};

/// Outcome of one analysis run. Renders identically in text and JSON on all
/// numeric fields; only timings vary between reruns.
struct AnalysisReport {
    AnalysisMode mode = AnalysisMode::Diff;
    std::string status; // threshold | verified | refuted | unknown
    SolveStatus solver_status = SolveStatus::Infeasible;
    std::optional<Rational> threshold_raw;
    std::optional<mpz_class> threshold_int;
    std::optional<Witness> witness;
    std::optional<Valuation> refute_input;
    std::map<std::string, std::map<std::string, std::string>> invariants_assumed;
    std::map<std::string, std::string> parameters;
    std::vector<std::string> warnings;
    std::map<std::string, double> timings_s;

    bool conclusive() const { return status != "unknown"; }
    std::string to_text() const;
    std::string to_json() const;
};

/// Pre-parsed input plus the invariants assumed for it.
struct PreparedSystem {
    TransitionSystem ts;
    InvariantMap inv;
};

/// Parses, runs the interval propagator, and merges user annotations (for
/// `system_tag` plus untagged lines) from `invariant_text` when nonempty.
PreparedSystem prepare(const std::string& path, const std::string& invariant_text,
                       const std::string& system_tag, const AnalysisOptions& opt);

/// Both inputs must share the variable set and Theta0 (section-3 shape of the
/// problem); throws SemanticError otherwise.
void check_shared_interface(const TransitionSystem& ts_new, const TransitionSystem& ts_old);

/// Minimized differential threshold with witnesses (mode: threshold).
AnalysisReport cmd_diff(const PreparedSystem& sys_new, const PreparedSystem& sys_old,
                        const AnalysisOptions& opt);

/// Symbolic polynomial bound verification (mode: verified | unknown).
AnalysisReport cmd_verify(const PreparedSystem& sys_new, const PreparedSystem& sys_old,
                          const Polynomial& bound, const AnalysisOptions& opt);

/// Threshold refutation at a concrete input, or over all corner points of
/// Theta0's interval box when `sweep_corners`.
AnalysisReport cmd_refute(const PreparedSystem& sys_new, const PreparedSystem& sys_old,
                          const Rational& threshold, std::optional<Valuation> x0,
                          bool sweep_corners, const AnalysisOptions& opt);

/// Single-program upper/lower bounds with minimized precision gap.
AnalysisReport cmd_single(const PreparedSystem& sys, const AnalysisOptions& opt);

} // namespace diffcost
