// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "diffcost/constraints.hpp"

#include <optional>
#include <string>
#include <vector>

namespace diffcost {

/// One element of Prod_K(Aff): a multiset of premise indices together with
/// the expanded product polynomial. The empty multiset is the constant 1.
struct ProductTerm {
    std::vector<int> factors; // sorted premise indices, size <= K
    Polynomial expansion;
};

/// All multisets of size 0..K over the premise list, expanded. Syntactically
/// duplicate expansions are dropped, keeping the first. Count before
/// deduplication is sum_{j<=K} C(k+j-1, j).
std::vector<ProductTerm> prod_k(const std::vector<AffineExpr>& premises, int K);

/// Existentially quantified linear system over template unknowns and
/// nonnegative multipliers. Variable kinds live in the shared pool.
struct LinearSystem {
    struct Equality {
        LinearCombo combo; // = 0
        std::string tag;
    };
    std::vector<Equality> equalities;
    std::vector<LinearCombo> inequalities; // combo >= 0 beyond plain var signs
    std::vector<int> nonneg_vars;          // the c_g >= 0 entries
    std::optional<LinearCombo> objective;  // minimized when present
    bool maximize = false;
    std::vector<std::string> warnings;
};

/// Translates one implication into coefficient equalities: conclusion-poly =
/// sum_g c_g * expansion(g) with fresh c_g >= 0, one equality per monomial of
/// either side. Warns (not errors) when the conclusion degree exceeds K and
/// when the premises leave some mentioned variable unbounded (the compactness
/// caveat of the underlying representation theorem).
LinearSystem translate(const ImplicationConstraint& c, int K, VarPool& pool);

/// Concatenates fragments and installs the objective (absent = feasibility).
LinearSystem assemble(std::vector<LinearSystem> fragments,
                      std::optional<LinearCombo> objective, bool maximize = false);

/// Plain-text rendering of the assembled system for external cross-checking.
std::string emit_lp(const LinearSystem& sys, const VarPool& pool);

} // namespace diffcost
