// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/ts.hpp"

#include <algorithm>
#include <sstream>

namespace diffcost {

bool Update::is_identity() const {
    for (auto& [v, e] : entries_) {
        if (std::holds_alternative<NondetUpdate>(e))
            return false;
        if (std::get<Polynomial>(e) != Polynomial::var(v))
            return false;
    }
    return true;
}

std::set<std::string> Update::reads() const {
    std::set<std::string> r;
    for (auto& [v, e] : entries_) {
        if (auto* p = std::get_if<Polynomial>(&e)) {
            auto vs = p->variables();
            r.insert(vs.begin(), vs.end());
        } else {
            auto& nd = std::get<NondetUpdate>(e);
            if (nd.lower) {
                auto vs = nd.lower->poly().variables();
                r.insert(vs.begin(), vs.end());
            }
            if (nd.upper) {
                auto vs = nd.upper->poly().variables();
                r.insert(vs.begin(), vs.end());
            }
        }
    }
    return r;
}

Update Update::and_then(const Update& then) const {
    // Deterministic entries of *this become the substitution applied to the
    // right-hand sides of `then`.
    std::map<std::string, Polynomial> sub;
    std::set<std::string> nondet_set;
    for (auto& [v, e] : entries_) {
        if (auto* p = std::get_if<Polynomial>(&e))
            sub[v] = *p;
        else
            nondet_set.insert(v);
    }
    auto reads_nondet = [&](const Polynomial& p) {
        for (auto& v : p.variables())
            if (nondet_set.count(v))
                return true;
        return false;
    };

    Update out = *this;
    for (auto& [v, e] : then.entries_) {
        if (auto* p = std::get_if<Polynomial>(&e)) {
            if (reads_nondet(*p))
                throw SemanticError("update composition reads nondeterministic value of a "
                                    "variable set in the same step");
            out.entries_[v] = p->subst(sub);
        } else {
            auto nd = std::get<NondetUpdate>(e);
            NondetUpdate composed;
            if (nd.lower) {
                if (reads_nondet(nd.lower->poly()))
                    throw SemanticError("nondet bound reads nondeterministic value");
                composed.lower = AffineExpr(nd.lower->poly().subst(sub));
            }
            if (nd.upper) {
                if (reads_nondet(nd.upper->poly()))
                    throw SemanticError("nondet bound reads nondeterministic value");
                composed.upper = AffineExpr(nd.upper->poly().subst(sub));
            }
            out.entries_[v] = composed;
        }
    }
    // Normalize: drop identity entries introduced by substitution.
    for (auto it = out.entries_.begin(); it != out.entries_.end();) {
        if (auto* p = std::get_if<Polynomial>(&it->second);
            p && *p == Polynomial::var(it->first))
            it = out.entries_.erase(it);
        else
            ++it;
    }
    return out;
}

std::string Update::str() const {
    std::ostringstream os;
    bool first = true;
    for (auto& [v, e] : entries_) {
        if (!first)
            os << ", ";
        first = false;
        os << v << " := ";
        if (auto* p = std::get_if<Polynomial>(&e)) {
            os << p->str();
        } else {
            auto& nd = std::get<NondetUpdate>(e);
            os << "nondet";
            if (nd.lower && nd.upper)
                os << " in [" << nd.lower->str() << ", " << nd.upper->str() << "]";
            else if (nd.lower)
                os << " >= " << nd.lower->str();
            else if (nd.upper)
                os << " <= " << nd.upper->str();
        }
    }
    return os.str();
}

bool TransitionSystem::has_location(const std::string& l) const {
    return std::find(locations.begin(), locations.end(), l) != locations.end();
}

bool TransitionSystem::has_variable(const std::string& v) const {
    return std::find(variables.begin(), variables.end(), v) != variables.end();
}

std::vector<const Transition*> TransitionSystem::outgoing(const std::string& loc) const {
    std::vector<const Transition*> out;
    for (auto& t : transitions)
        if (t.source == loc)
            out.push_back(&t);
    return out;
}

bool TransitionSystem::is_written(const std::string& var) const {
    for (auto& t : transitions) {
        auto it = t.update.entries().find(var);
        if (it == t.update.entries().end())
            continue;
        if (std::holds_alternative<NondetUpdate>(it->second))
            return true;
        if (std::get<Polynomial>(it->second) != Polynomial::var(var))
            return true;
    }
    return false;
}

void TransitionSystem::assign_ids() {
    for (std::size_t i = 0; i < transitions.size(); ++i)
        transitions[i].id = "t" + std::to_string(i);
}

void TransitionSystem::validate() const {
    if (!has_variable(kCostVar))
        throw SemanticError("missing distinguished variable 'cost'");
    if (!has_location(initial))
        throw SemanticError("initial location '" + initial + "' not declared");
    if (!has_location(terminal))
        throw SemanticError("terminal location '" + terminal + "' not declared");

    for (auto& t : transitions) {
        if (!has_location(t.source) || !has_location(t.target))
            throw SemanticError("transition " + t.id + " references undeclared location");
        for (auto& v : t.guard.conjuncts)
            for (auto& name : v.poly().variables())
                if (!has_variable(name))
                    throw SemanticError("guard of " + t.id + " uses undeclared variable " + name);
        for (auto& [v, e] : t.update.entries())
            if (!has_variable(v))
                throw SemanticError("update of " + t.id + " writes undeclared variable " + v);
        for (auto& name : t.update.reads())
            if (!has_variable(name))
                throw SemanticError("update of " + t.id + " reads undeclared variable " + name);
    }

    for (auto& l : locations) {
        auto out = outgoing(l);
        if (out.empty())
            throw SemanticError("location '" + l + "' has no outgoing transition");
        if (l == terminal) {
            if (out.size() != 1)
                throw SemanticError("terminal location must have exactly one outgoing transition");
            auto& t = *out[0];
            if (t.target != terminal || !t.guard.is_true() || !t.update.is_identity())
                throw SemanticError("terminal transition must be an identity self-loop with guard true");
        }
    }

    // Theta0 must entail cost = 0, encoded as the conjunct pair cost >= 0 and
    // -cost >= 0.
    Polynomial c = Polynomial::var(kCostVar);
    bool has_pos = false, has_neg = false;
    for (auto& a : theta0.conjuncts) {
        if (a.poly() == c)
            has_pos = true;
        if (a.poly() == -c)
            has_neg = true;
        for (auto& name : a.poly().variables())
            if (!has_variable(name))
                throw SemanticError("theta0 uses undeclared variable " + name);
    }
    if (!has_pos || !has_neg)
        throw SemanticError("theta0 must contain the conjuncts cost >= 0 and -cost >= 0");
}

namespace {
std::string transition_key(const Transition& t) {
    return t.source + "|" + t.target + "|" + t.guard.str() + "|" + t.update.str();
}
} // namespace

bool TransitionSystem::same_structure(const TransitionSystem& o) const {
    if (variables != o.variables || initial != o.initial || terminal != o.terminal)
        return false;
    std::vector<std::string> la = locations, lb = o.locations;
    std::sort(la.begin(), la.end());
    std::sort(lb.begin(), lb.end());
    if (la != lb)
        return false;
    if (!(theta0 == o.theta0))
        return false;
    std::vector<std::string> ta, tb;
    for (auto& t : transitions)
        ta.push_back(transition_key(t));
    for (auto& t : o.transitions)
        tb.push_back(transition_key(t));
    std::sort(ta.begin(), ta.end());
    std::sort(tb.begin(), tb.end());
    return ta == tb;
}

std::string print_ts(const TransitionSystem& ts) {
    std::ostringstream os;
    os << "vars";
    for (auto& v : ts.variables)
        os << " " << v;
    os << ";\n";
    os << "init " << ts.initial << ";\n";
    os << "terminal " << ts.terminal << ";\n";
    os << "theta0 " << ts.theta0.str() << ";\n";
    for (auto& t : ts.transitions) {
        os << "trans " << t.source << " -> " << t.target;
        if (!t.guard.is_true())
            os << " guard " << t.guard.str();
        if (!t.update.is_identity())
            os << " update " << t.update.str();
        os << ";\n";
    }
    return os.str();
}

} // namespace diffcost
