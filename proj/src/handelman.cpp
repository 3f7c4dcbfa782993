// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/handelman.hpp"

#include "interval.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace diffcost {

std::vector<ProductTerm> prod_k(const std::vector<AffineExpr>& premises, int K) {
    if (K < 0)
        throw SemanticError("product size bound must be nonnegative");
    std::vector<ProductTerm> out;
    std::set<Polynomial> seen;

    // Multisets in nondecreasing index order, sizes 0..K; the iteration
    // order is deterministic with the constant term first.
    auto expand = [&](const std::vector<int>& idx) {
        Polynomial p(1);
        for (int i : idx)
            p = p * premises[i].poly();
        return p;
    };
    // breadth by size keeps the constant term first
    std::vector<std::vector<int>> level{{}};
    for (int size = 0; size <= K; ++size) {
        std::vector<std::vector<int>> next;
        for (auto& idx : level) {
            Polynomial p = expand(idx);
            if (seen.insert(p).second)
                out.push_back({idx, std::move(p)});
            int start = idx.empty() ? 0 : idx.back();
            if (size < K)
                for (int i = start; i < static_cast<int>(premises.size()); ++i) {
                    auto nxt = idx;
                    nxt.push_back(i);
                    next.push_back(std::move(nxt));
                }
        }
        level = std::move(next);
    }
    return out;
}

namespace {

// Warns when the premise set fails to bound some mentioned variable on both
// sides; the translation stays sound but loses its completeness direction.
void compactness_warning(const ImplicationConstraint& c, LinearSystem& sys) {
    std::set<std::string> vars;
    for (auto& p : c.premises)
        for (auto& v : p.poly().variables())
            vars.insert(v);
    for (auto& [m, combo] : c.conclusion)
        for (auto& [v, e] : m.exponents())
            vars.insert(v);
    if (vars.empty())
        return;
    detail::Box box;
    detail::refine_box(box, c.premises);
    std::vector<std::string> unbounded;
    for (auto& v : vars) {
        detail::Interval iv = detail::box_get(box, v);
        if (!iv.empty && (!iv.lo || !iv.hi))
            unbounded.push_back(v);
    }
    if (!unbounded.empty()) {
        std::string list;
        for (auto& v : unbounded)
            list += (list.empty() ? "" : ", ") + v;
        sys.warnings.push_back("constraint " + c.tag + ": premises leave " + list +
                               " unbounded; the translation is sound but may be incomplete");
    }
}

} // namespace

LinearSystem translate(const ImplicationConstraint& c, int K, VarPool& pool) {
    LinearSystem sys;

    // Premises are deduplicated and constant-nonnegative ones dropped by the
    // collectors; do it again for directly-constructed constraints.
    std::vector<AffineExpr> premises;
    for (auto& p : c.premises) {
        if (p.poly().is_constant() && p.poly().constant_term().sign() >= 0)
            continue;
        if (std::find(premises.begin(), premises.end(), p) == premises.end())
            premises.push_back(p);
    }

    auto products = prod_k(premises, K);

    int conclusion_degree = 0;
    for (auto& [m, combo] : c.conclusion)
        conclusion_degree = std::max(conclusion_degree, m.degree());
    if (conclusion_degree > K)
        sys.warnings.push_back("constraint " + c.tag + ": conclusion degree " +
                               std::to_string(conclusion_degree) + " exceeds K=" +
                               std::to_string(K) +
                               "; higher-degree coefficients are forced to zero");
    compactness_warning(c, sys);

    // Monomial universe: conclusion support union expansion support.
    std::set<Monomial> universe;
    for (auto& [m, combo] : c.conclusion)
        universe.insert(m);
    std::vector<int> cvars;
    cvars.reserve(products.size());
    for (std::size_t j = 0; j < products.size(); ++j) {
        int var = pool.intern("c[" + c.tag + "][" + std::to_string(j) + "]", /*nonneg=*/true);
        cvars.push_back(var);
        sys.nonneg_vars.push_back(var);
        for (auto& [m, coeff] : products[j].expansion.terms())
            universe.insert(m);
    }

    // One equality per monomial: conclusion[m] - sum_g coeff_g(m) c_g = 0.
    for (auto& m : universe) {
        LinearCombo eq;
        auto it = c.conclusion.find(m);
        if (it != c.conclusion.end())
            eq = it->second;
        for (std::size_t j = 0; j < products.size(); ++j) {
            Rational coeff = products[j].expansion.coeff(m);
            if (!coeff.is_zero())
                eq.add(cvars[j], -coeff);
        }
        if (eq.is_zero())
            continue;
        sys.equalities.push_back({std::move(eq), c.tag + "#" + m.str()});
    }
    return sys;
}

LinearSystem assemble(std::vector<LinearSystem> fragments,
                      std::optional<LinearCombo> objective, bool maximize) {
    LinearSystem sys;
    for (auto& f : fragments) {
        std::move(f.equalities.begin(), f.equalities.end(), std::back_inserter(sys.equalities));
        std::move(f.inequalities.begin(), f.inequalities.end(),
                  std::back_inserter(sys.inequalities));
        sys.nonneg_vars.insert(sys.nonneg_vars.end(), f.nonneg_vars.begin(),
                               f.nonneg_vars.end());
        std::move(f.warnings.begin(), f.warnings.end(), std::back_inserter(sys.warnings));
    }
    sys.objective = std::move(objective);
    sys.maximize = maximize;
    return sys;
}

std::string emit_lp(const LinearSystem& sys, const VarPool& pool) {
    std::ostringstream os;
    os << "# linear system: " << sys.equalities.size() << " equalities, "
       << pool.size() << " variables\n";
    std::set<int> used;
    auto note = [&](const LinearCombo& c) {
        for (auto& [v, k] : c.coeffs)
            used.insert(v);
    };
    for (auto& e : sys.equalities)
        note(e.combo);
    for (auto& i : sys.inequalities)
        note(i);
    if (sys.objective)
        note(*sys.objective);
    for (int v : used)
        os << "var " << pool.name(v) << (pool.nonneg(v) ? " >= 0" : " free") << "\n";
    if (sys.objective)
        os << (sys.maximize ? "maximize " : "minimize ") << sys.objective->str(pool) << "\n";
    for (auto& e : sys.equalities)
        os << "eq " << e.combo.str(pool) << " = 0  # " << e.tag << "\n";
    for (auto& i : sys.inequalities)
        os << "ineq " << i.str(pool) << " >= 0\n";
    return os.str();
}

} // namespace diffcost
