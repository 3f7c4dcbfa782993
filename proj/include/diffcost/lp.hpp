// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "diffcost/handelman.hpp"

#include <map>
#include <optional>
#include <string>

namespace diffcost {

enum class SolveStatus { Optimal, Feasible, Infeasible, Unbounded, Timeout, Rejected };

std::string to_string(SolveStatus s);

struct Solution {
    SolveStatus status = SolveStatus::Infeasible;
    std::map<int, Rational> assignment; // pool index -> exact value
    std::optional<Rational> objective_value;
    long pivots = 0;
    bool dual_ok = true;
};

struct SolverOptions {
    long pivot_cap = 1000000;
};

/// Exact rational simplex over the assembled system. Two phases, Dantzig
/// pricing with a Bland fallback on degenerate stalls, preceded by a presolve
/// that eliminates free variables and zero-forced multipliers. Returned
/// assignments satisfy every constraint exactly; this is asserted before
/// returning.
Solution solve(const LinearSystem& sys, const VarPool& pool, const SolverOptions& opt = {});

/// Exact check of an assignment against the system: every equality residual
/// and inequality slack within `tol` (use 0 for the built-in solver).
bool verify_solution(const LinearSystem& sys, const VarPool& pool,
                     const std::map<int, Rational>& assignment, const Rational& tol,
                     std::string* why = nullptr);

/// "exact" runs the built-in solver. "external:<cmd>" runs `<cmd> <lp-file>`
/// against the textual interchange format and re-verifies the returned point
/// exactly; residuals beyond 1e-6 yield status Rejected. External answers are
/// never trusted unverified.
Solution solver_backend(const LinearSystem& sys, const VarPool& pool,
                        const std::string& backend, const SolverOptions& opt = {});

enum class AnalysisMode { Diff, Verify, Refute, Single };

std::string to_string(AnalysisMode m);

/// Solved threshold plus concrete per-location polynomials. In Diff/Verify
/// mode `upper` is the PF of the new system and `lower` the anti-PF of the
/// old; in Refute mode `upper` is the PF of the old system and `lower` the
/// anti-PF of the new; in Single mode both live on the one system.
struct Witness {
    AnalysisMode mode = AnalysisMode::Diff;
    Rational threshold_raw;
    mpz_class threshold_int;
    std::map<std::string, Polynomial> upper;
    std::map<std::string, Polynomial> lower;
    std::string upper_system;
    std::string lower_system;
};

/// Substitutes the solved coefficients into the templates; zero terms drop
/// out. `threshold_var` < 0 means the mode has no threshold (verification).
Witness extract_witness(const Solution& sol, AnalysisMode mode, const TemplateMap& upper,
                        const TemplateMap& lower, int threshold_var);

} // namespace diffcost
