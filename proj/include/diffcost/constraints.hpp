// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "diffcost/invariants.hpp"
#include "diffcost/ts.hpp"

#include <map>
#include <string>
#include <vector>

namespace diffcost {

/// Interned symbolic unknowns: template coefficients, the threshold, and the
/// Handelman multipliers added later. Names are globally unique and stable
/// across reruns; index order is creation order.
class VarPool {
  public:
    int intern(const std::string& name, bool nonneg) {
        auto it = index_.find(name);
        if (it != index_.end()) {
            if (nonneg_[it->second] != nonneg)
                throw SemanticError("symbol '" + name + "' interned with conflicting sign");
            return it->second;
        }
        int idx = static_cast<int>(names_.size());
        names_.push_back(name);
        nonneg_.push_back(nonneg);
        index_[name] = idx;
        return idx;
    }
    const std::string& name(int idx) const { return names_.at(idx); }
    bool nonneg(int idx) const { return nonneg_.at(idx); }
    std::size_t size() const { return names_.size(); }

  private:
    std::vector<std::string> names_;
    std::vector<bool> nonneg_;
    std::map<std::string, int> index_;
};

/// constant + sum(coeff * symbol): an expression linear in the symbolic
/// unknowns. Canonical, no zero coefficients stored.
struct LinearCombo {
    Rational constant;
    std::map<int, Rational> coeffs;

    void add(int var, const Rational& c) {
        if (c.is_zero())
            return;
        auto [it, fresh] = coeffs.emplace(var, c);
        if (!fresh) {
            it->second += c;
            if (it->second.is_zero())
                coeffs.erase(it);
        }
    }
    void add_const(const Rational& c) { constant += c; }
    bool is_zero() const { return constant.is_zero() && coeffs.empty(); }

    Rational eval(const std::map<int, Rational>& assignment) const {
        Rational r = constant;
        for (auto& [v, c] : coeffs) {
            auto it = assignment.find(v);
            if (it != assignment.end())
                r += c * it->second;
        }
        return r;
    }
    std::string str(const VarPool& pool) const;
};

/// Per-location symbolic polynomial: each monomial of degree <= d carries one
/// template unknown.
struct TemplateMap {
    std::string tag;
    int degree = 0;
    std::map<std::string, std::map<Monomial, int>> at; // loc -> monomial -> var idx

    /// Concrete polynomial at `loc` under a solved assignment.
    Polynomial instantiate(const std::string& loc,
                           const std::map<int, Rational>& assignment) const;
};

/// forall x: premises >= 0  ==>  conclusion-poly(x) >= 0, where the
/// conclusion's coefficients are linear in template unknowns. Premises range
/// over program variables plus fresh nondet names.
struct ImplicationConstraint {
    std::vector<AffineExpr> premises;
    std::map<Monomial, LinearCombo> conclusion;
    std::string tag;
};

/// Step 1: one unknown per (location, monomial of degree <= d), monomials
/// over the system variables minus cost unless `include_cost`.
TemplateMap fix_templates(const TransitionSystem& ts, int d, const std::string& tag,
                          bool include_cost, VarPool& pool);

/// Substitutes each variable of `p` by its update entry: the polynomial for
/// deterministic entries, the fresh name "<var>@<transition-id>" for
/// nondeterministic ones.
Polynomial substitute_update(const Polynomial& p, const Update& up,
                             const std::string& transition_id);

/// Sufficiency preservation per transition plus nonnegativity on termination.
std::vector<ImplicationConstraint> collect_pf_constraints(const TransitionSystem& ts,
                                                          const InvariantMap& inv,
                                                          const TemplateMap& tmpl);

/// Dual: insufficiency preservation plus nonpositivity on termination.
std::vector<ImplicationConstraint> collect_antipf_constraints(const TransitionSystem& ts,
                                                              const InvariantMap& inv,
                                                              const TemplateMap& tmpl);

/// Theta0 ==> t - (phi_new(l0_new) - chi_old(l0_old)) >= 0.
ImplicationConstraint collect_diffcost_constraint(const Assertion& theta0,
                                                  const TemplateMap& tmpl_new,
                                                  const std::string& init_new,
                                                  const TemplateMap& tmpl_old,
                                                  const std::string& init_old, int threshold_var);

/// Theta0 ==> p(x) - phi_new(l0_new, x) + chi_old(l0_old, x) >= 0; requires
/// deg(p) <= template degree.
ImplicationConstraint collect_symbolic_bound_constraint(const Assertion& theta0,
                                                        const TemplateMap& tmpl_new,
                                                        const std::string& init_new,
                                                        const TemplateMap& tmpl_old,
                                                        const std::string& init_old,
                                                        const Polynomial& bound);

/// Threshold refutation: anti-PF constraints on the new system, PF
/// constraints on the old, plus the ground witness constraint
/// chi_new(l0,x0) - phi_old(l0,x0) >= t + eps at the concrete input x0.
std::vector<ImplicationConstraint> collect_refutation_constraints(
    const TransitionSystem& ts_new, const InvariantMap& inv_new, const TemplateMap& tmpl_new_anti,
    const TransitionSystem& ts_old, const InvariantMap& inv_old, const TemplateMap& tmpl_old_pf,
    const Valuation& x0, const Rational& threshold, const Rational& eps);

/// Single-program precision: PF and anti-PF constraints on one system plus
/// Theta0 ==> p - (phi(l0) - chi(l0)) >= 0 with p the precision unknown.
std::vector<ImplicationConstraint> collect_precision_constraints(const TransitionSystem& ts,
                                                                 const InvariantMap& inv,
                                                                 const TemplateMap& tmpl_pf,
                                                                 const TemplateMap& tmpl_anti,
                                                                 int precision_var);

} // namespace diffcost
