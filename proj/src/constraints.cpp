// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/constraints.hpp"

#include <algorithm>
#include <sstream>

namespace diffcost {

std::string LinearCombo::str(const VarPool& pool) const {
    std::ostringstream os;
    bool first = true;
    for (auto& [v, c] : coeffs) {
        if (!first)
            os << " + ";
        first = false;
        if (c == Rational(1))
            os << pool.name(v);
        else
            os << c.str() << "*" << pool.name(v);
    }
    if (!constant.is_zero() || first) {
        if (!first)
            os << " + ";
        os << constant.str();
    }
    return os.str();
}

Polynomial TemplateMap::instantiate(const std::string& loc,
                                    const std::map<int, Rational>& assignment) const {
    auto it = at.find(loc);
    if (it == at.end())
        throw SemanticError("template has no entry for location " + loc);
    Polynomial p;
    for (auto& [m, var] : it->second) {
        auto a = assignment.find(var);
        if (a != assignment.end())
            p.add_term(m, a->second);
    }
    return p;
}

TemplateMap fix_templates(const TransitionSystem& ts, int d, const std::string& tag,
                          bool include_cost, VarPool& pool) {
    if (d < 0)
        throw SemanticError("template degree must be nonnegative");
    std::vector<std::string> vars;
    for (auto& v : ts.variables)
        if (include_cost || v != kCostVar)
            vars.push_back(v);
    auto monos = monomials(vars, d);
    TemplateMap tm;
    tm.tag = tag;
    tm.degree = d;
    for (auto& loc : ts.locations) {
        auto& slot = tm.at[loc];
        for (auto& m : monos)
            slot[m] = pool.intern("u[" + tag + "][" + loc + "][" + m.str() + "]",
                                  /*nonneg=*/false);
    }
    return tm;
}

Polynomial substitute_update(const Polynomial& p, const Update& up,
                             const std::string& transition_id) {
    std::map<std::string, Polynomial> sub;
    for (auto& [v, e] : up.entries()) {
        if (auto* q = std::get_if<Polynomial>(&e))
            sub[v] = *q;
        else
            sub[v] = Polynomial::var(v + "@" + transition_id);
    }
    return p.subst(sub);
}

namespace {

Polynomial cost_delta(const Transition& t) {
    auto e = t.update.entry(kCostVar);
    auto* p = std::get_if<Polynomial>(&e);
    if (!p)
        throw SemanticError("transition " + t.id +
                            " updates cost nondeterministically; the cost delta must be a "
                            "polynomial");
    return *p - Polynomial::var(kCostVar);
}

// Bounds premises for the fresh variables of nondeterministic entries.
void nondet_bound_premises(const Transition& t, std::vector<AffineExpr>& premises) {
    for (auto& [v, e] : t.update.entries()) {
        auto* nd = std::get_if<NondetUpdate>(&e);
        if (!nd)
            continue;
        Polynomial fresh = Polynomial::var(v + "@" + t.id);
        if (nd->lower)
            premises.push_back(AffineExpr(fresh - nd->lower->poly()));
        if (nd->upper)
            premises.push_back(AffineExpr(nd->upper->poly() - fresh));
    }
}

bool conclusion_mentions(const std::map<Monomial, LinearCombo>& conclusion,
                         const std::string& var) {
    for (auto& [m, c] : conclusion)
        if (m.exponent(var) > 0)
            return true;
    return false;
}

// Normalizes a constraint before emission: deduplicates premises, drops
// constant nonnegative ones, drops single-term cost premises when cost cannot
// occur in the conclusion (a Handelman certificate never needs them then),
// and drops zero conclusion entries. Returns false when the premises are
// statically contradictory, making the implication vacuous.
bool finalize(ImplicationConstraint& c) {
    std::vector<AffineExpr> kept;
    bool cost_free = !conclusion_mentions(c.conclusion, kCostVar);
    for (auto& p : c.premises) {
        const Polynomial& q = p.poly();
        if (q.is_constant()) {
            if (q.constant_term().sign() < 0)
                return false; // unsatisfiable premises: vacuous constraint
            continue;
        }
        if (cost_free && q.terms().size() == 1 &&
            q.terms().begin()->first == Monomial(kCostVar))
            continue;
        if (std::find(kept.begin(), kept.end(), p) == kept.end())
            kept.push_back(p);
    }
    c.premises = std::move(kept);
    for (auto it = c.conclusion.begin(); it != c.conclusion.end();) {
        if (it->second.is_zero())
            it = c.conclusion.erase(it);
        else
            ++it;
    }
    return true;
}

// phi(loc) as a symbolic conclusion contribution with the given sign.
void add_template(std::map<Monomial, LinearCombo>& conclusion, const TemplateMap& tmpl,
                  const std::string& loc, int sign) {
    auto it = tmpl.at.find(loc);
    if (it == tmpl.at.end())
        throw SemanticError("template misses location " + loc);
    for (auto& [m, var] : it->second)
        conclusion[m].add(var, Rational(sign));
}

// phi(loc) composed with an update, as a symbolic conclusion contribution.
void add_template_updated(std::map<Monomial, LinearCombo>& conclusion, const TemplateMap& tmpl,
                          const std::string& loc, const Transition& t, int sign) {
    auto it = tmpl.at.find(loc);
    if (it == tmpl.at.end())
        throw SemanticError("template misses location " + loc);
    for (auto& [m, var] : it->second) {
        Polynomial mono = Polynomial::term(Rational(1), m);
        Polynomial img = substitute_update(mono, t.update, t.id);
        for (auto& [m2, c2] : img.terms())
            conclusion[m2].add(var, c2 * Rational(sign));
    }
}

void add_concrete(std::map<Monomial, LinearCombo>& conclusion, const Polynomial& p, int sign) {
    for (auto& [m, c] : p.terms())
        conclusion[m].add_const(c * Rational(sign));
}

std::vector<ImplicationConstraint> collect_flow(const TransitionSystem& ts,
                                                const InvariantMap& inv, const TemplateMap& tmpl,
                                                bool is_pf) {
    std::vector<ImplicationConstraint> out;
    const char* kind = is_pf ? "pf" : "anti";
    for (auto& t : ts.transitions) {
        ImplicationConstraint c;
        c.tag = std::string(kind) + ":" + tmpl.tag + ":" + t.id;
        c.premises = inv.of(t.source).conjuncts;
        for (auto& g : t.guard.conjuncts)
            c.premises.push_back(g);
        nondet_bound_premises(t, c.premises);

        Polynomial delta = cost_delta(t);
        if (is_pf) {
            // phi(l) - phi(l', Up(x)) - delta >= 0
            add_template(c.conclusion, tmpl, t.source, +1);
            add_template_updated(c.conclusion, tmpl, t.target, t, -1);
            add_concrete(c.conclusion, delta, -1);
        } else {
            // chi(l', Up(x)) + delta - chi(l) >= 0
            add_template_updated(c.conclusion, tmpl, t.target, t, +1);
            add_concrete(c.conclusion, delta, +1);
            add_template(c.conclusion, tmpl, t.source, -1);
        }
        if (finalize(c))
            out.push_back(std::move(c));
    }

    // Termination side: phi(lout) >= 0 resp. -chi(lout) >= 0 on I(lout).
    ImplicationConstraint term;
    term.tag = std::string(kind) + "-term:" + tmpl.tag;
    term.premises = inv.of(ts.terminal).conjuncts;
    add_template(term.conclusion, tmpl, ts.terminal, is_pf ? +1 : -1);
    if (finalize(term))
        out.push_back(std::move(term));
    return out;
}

} // namespace

std::vector<ImplicationConstraint> collect_pf_constraints(const TransitionSystem& ts,
                                                          const InvariantMap& inv,
                                                          const TemplateMap& tmpl) {
    return collect_flow(ts, inv, tmpl, /*is_pf=*/true);
}

std::vector<ImplicationConstraint> collect_antipf_constraints(const TransitionSystem& ts,
                                                              const InvariantMap& inv,
                                                              const TemplateMap& tmpl) {
    return collect_flow(ts, inv, tmpl, /*is_pf=*/false);
}

ImplicationConstraint collect_diffcost_constraint(const Assertion& theta0,
                                                  const TemplateMap& tmpl_new,
                                                  const std::string& init_new,
                                                  const TemplateMap& tmpl_old,
                                                  const std::string& init_old,
                                                  int threshold_var) {
    ImplicationConstraint c;
    c.tag = "diffcost";
    c.premises = theta0.conjuncts;
    c.conclusion[Monomial()].add(threshold_var, Rational(1));
    add_template(c.conclusion, tmpl_new, init_new, -1);
    add_template(c.conclusion, tmpl_old, init_old, +1);
    if (!finalize(c))
        throw SemanticError("theta0 is statically contradictory");
    return c;
}

ImplicationConstraint collect_symbolic_bound_constraint(const Assertion& theta0,
                                                        const TemplateMap& tmpl_new,
                                                        const std::string& init_new,
                                                        const TemplateMap& tmpl_old,
                                                        const std::string& init_old,
                                                        const Polynomial& bound) {
    if (bound.degree() > tmpl_new.degree)
        throw SemanticError("bound degree " + std::to_string(bound.degree()) +
                            " exceeds template degree " + std::to_string(tmpl_new.degree));
    ImplicationConstraint c;
    c.tag = "bound";
    c.premises = theta0.conjuncts;
    add_concrete(c.conclusion, bound, +1);
    add_template(c.conclusion, tmpl_new, init_new, -1);
    add_template(c.conclusion, tmpl_old, init_old, +1);
    if (!finalize(c))
        throw SemanticError("theta0 is statically contradictory");
    return c;
}

std::vector<ImplicationConstraint> collect_refutation_constraints(
    const TransitionSystem& ts_new, const InvariantMap& inv_new, const TemplateMap& tmpl_new_anti,
    const TransitionSystem& ts_old, const InvariantMap& inv_old, const TemplateMap& tmpl_old_pf,
    const Valuation& x0, const Rational& threshold, const Rational& eps) {
    if (eps.sign() <= 0)
        throw SemanticError("refutation eps must be positive");
    if (!ts_new.theta0.holds(x0))
        throw SemanticError("refutation witness input does not satisfy theta0");

    auto out = collect_antipf_constraints(ts_new, inv_new, tmpl_new_anti);
    auto pf = collect_pf_constraints(ts_old, inv_old, tmpl_old_pf);
    out.insert(out.end(), pf.begin(), pf.end());

    // Ground witness constraint, quantifier-free:
    //   chi_new(l0, x0) - phi_old(l0, x0) - (t + eps) >= 0
    ImplicationConstraint g;
    g.tag = "refute-ground";
    for (auto& [m, var] : tmpl_new_anti.at.at(ts_new.initial)) {
        Polynomial mono = Polynomial::term(Rational(1), m);
        g.conclusion[Monomial()].add(var, mono.eval(x0));
    }
    for (auto& [m, var] : tmpl_old_pf.at.at(ts_old.initial)) {
        Polynomial mono = Polynomial::term(Rational(1), m);
        g.conclusion[Monomial()].add(var, -mono.eval(x0));
    }
    g.conclusion[Monomial()].add_const(-(threshold + eps));
    if (finalize(g))
        out.push_back(std::move(g));
    return out;
}

std::vector<ImplicationConstraint> collect_precision_constraints(const TransitionSystem& ts,
                                                                 const InvariantMap& inv,
                                                                 const TemplateMap& tmpl_pf,
                                                                 const TemplateMap& tmpl_anti,
                                                                 int precision_var) {
    auto out = collect_pf_constraints(ts, inv, tmpl_pf);
    auto anti = collect_antipf_constraints(ts, inv, tmpl_anti);
    out.insert(out.end(), anti.begin(), anti.end());

    ImplicationConstraint c;
    c.tag = "precision";
    c.premises = ts.theta0.conjuncts;
    c.conclusion[Monomial()].add(precision_var, Rational(1));
    add_template(c.conclusion, tmpl_pf, ts.initial, -1);
    add_template(c.conclusion, tmpl_anti, ts.initial, +1);
    if (!finalize(c))
        throw SemanticError("theta0 is statically contradictory");
    out.push_back(std::move(c));
    return out;
}

} // namespace diffcost
