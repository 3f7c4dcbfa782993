// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/oracle.hpp"

#include "interval.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace diffcost {

namespace {

std::int64_t to_int64(const Rational& r, const char* what) {
    if (!r.is_integer())
        throw SemanticError(std::string(what) + ": non-integer value " + r.str());
    mpz_class z = r.num();
    if (!z.fits_slong_p())
        throw SemanticError(std::string(what) + ": value out of range");
    return z.get_si();
}

// Whether cost influences control or data flow. If it does not, run search
// can memoize on the cost-erased state and track relative cost.
bool cost_is_isolated(const TransitionSystem& ts) {
    for (auto& t : ts.transitions) {
        for (auto& g : t.guard.conjuncts)
            if (g.poly().variables().count(kCostVar))
                return false;
        for (auto& [v, e] : t.update.entries()) {
            if (auto* p = std::get_if<Polynomial>(&e)) {
                if (v == kCostVar) {
                    Polynomial delta = *p - Polynomial::var(kCostVar);
                    if (delta.variables().count(kCostVar))
                        return false;
                } else if (p->variables().count(kCostVar)) {
                    return false;
                }
            } else {
                if (v == kCostVar)
                    return false; // nondeterministic cost
                auto& nd = std::get<NondetUpdate>(e);
                if (nd.lower && nd.lower->poly().variables().count(kCostVar))
                    return false;
                if (nd.upper && nd.upper->poly().variables().count(kCostVar))
                    return false;
            }
        }
    }
    return true;
}

struct Engine {
    const TransitionSystem& ts;
    const RunBudget& budget;
    bool isolated;

    // memo key: location index + state values (cost excluded when isolated)
    std::map<std::pair<std::string, std::vector<std::int64_t>>, CostExtremes> memo;
    std::set<std::pair<std::string, std::vector<std::int64_t>>> on_stack;
    std::int64_t states_seen = 0;

    explicit Engine(const TransitionSystem& ts_, const RunBudget& b)
        : ts(ts_), budget(b), isolated(cost_is_isolated(ts_)) {}

    std::vector<std::int64_t> key_of(const Valuation& x) const {
        std::vector<std::int64_t> k;
        k.reserve(ts.variables.size());
        for (auto& v : ts.variables) {
            if (isolated && v == kCostVar)
                continue;
            k.push_back(x.at(v));
        }
        return k;
    }

    std::pair<std::int64_t, std::int64_t> nondet_range(const NondetUpdate& nd,
                                                       const Valuation& x) const {
        std::int64_t lo = budget.default_nondet.first;
        std::int64_t hi = budget.default_nondet.second;
        if (nd.lower)
            lo = to_int64(nd.lower->eval(x), "nondet lower bound");
        if (nd.upper)
            hi = to_int64(nd.upper->eval(x), "nondet upper bound");
        if (lo > hi)
            throw SemanticError("empty nondet range at runtime");
        if (hi - lo > 64)
            throw SemanticError("nondet range too large for exhaustive enumeration");
        return {lo, hi};
    }

    // Successors of (loc, x): for each enabled transition and each resolution
    // of its nondeterministic entries, the post-state and incurred cost.
    void successors(const std::string& loc, const Valuation& x,
                    std::vector<std::pair<std::string, Valuation>>& out) const {
        for (auto& t : ts.transitions) {
            if (t.source != loc)
                continue;
            if (!t.guard.holds(x))
                continue;
            std::vector<std::pair<std::string, std::pair<std::int64_t, std::int64_t>>> nds;
            for (auto& [v, e] : t.update.entries())
                if (std::holds_alternative<NondetUpdate>(e))
                    nds.push_back({v, nondet_range(std::get<NondetUpdate>(e), x)});

            std::vector<std::int64_t> choice(nds.size());
            for (std::size_t i = 0; i < nds.size(); ++i)
                choice[i] = nds[i].second.first;
            for (;;) {
                Valuation next = x;
                for (std::size_t i = 0; i < nds.size(); ++i)
                    next[nds[i].first] = choice[i];
                for (auto& [v, e] : t.update.entries())
                    if (auto* p = std::get_if<Polynomial>(&e))
                        next[v] = to_int64(p->eval(x), "update");
                out.push_back({t.target, std::move(next)});
                // advance the choice vector
                std::size_t i = 0;
                for (; i < nds.size(); ++i) {
                    if (choice[i] < nds[i].second.second) {
                        ++choice[i];
                        for (std::size_t j = 0; j < i; ++j)
                            choice[j] = nds[j].second.first;
                        break;
                    }
                }
                if (i == nds.size())
                    break;
            }
        }
    }

    struct Frame {
        std::pair<std::string, std::vector<std::int64_t>> key;
        std::vector<std::pair<std::string, Valuation>> succs;
        std::size_t child = 0;
        std::int64_t base = 0;
        CostExtremes acc{0, 0};
        bool first = true;
    };

    // Exact (inf, sup) of total cost-to-termination relative to the cost at
    // (loc, x). Iterative depth-first search with memoization; a state
    // revisited along the current path proves an infinite run.
    CostExtremes explore(const std::string& loc0, const Valuation& x0) {
        CostExtremes ret{0, 0};
        bool returned = false;
        std::vector<Frame> st;

        auto enter = [&](const std::string& loc, const Valuation& x) {
            if (loc == ts.terminal) {
                ret = {0, 0};
                returned = true;
                return;
            }
            auto key = std::make_pair(loc, key_of(x));
            if (auto it = memo.find(key); it != memo.end()) {
                ret = it->second;
                returned = true;
                return;
            }
            if (on_stack.count(key))
                throw StepBudgetExhausted("run revisits a state: the system is not terminating");
            if (static_cast<std::int64_t>(st.size()) >= budget.max_steps)
                throw StepBudgetExhausted(
                    "run exceeds step budget of " + std::to_string(budget.max_steps) +
                    " (non-terminating input or budget too small)");
            if (++states_seen > budget.state_cap)
                throw StepBudgetExhausted("state cap exceeded during run enumeration");
            on_stack.insert(key);
            Frame f;
            f.key = std::move(key);
            successors(loc, x, f.succs);
            if (f.succs.empty())
                throw SemanticError("stuck state at location " + loc +
                                    " (no enabled transition)");
            f.base = x.at(kCostVar);
            st.push_back(std::move(f));
            returned = false;
        };

        enter(loc0, x0);
        while (!st.empty()) {
            Frame& f = st.back();
            if (returned) {
                auto& consumed = f.succs[f.child - 1];
                std::int64_t step = consumed.second.at(kCostVar) - f.base;
                std::int64_t lo = step + ret.inf, hi = step + ret.sup;
                if (f.first) {
                    f.acc = {lo, hi};
                    f.first = false;
                } else {
                    f.acc.inf = std::min(f.acc.inf, lo);
                    f.acc.sup = std::max(f.acc.sup, hi);
                }
                consumed.second.clear();
                returned = false;
            }
            if (f.child < f.succs.size()) {
                auto& nxt = f.succs[f.child++];
                enter(nxt.first, nxt.second);
                continue;
            }
            ret = f.acc;
            returned = true;
            on_stack.erase(f.key);
            memo.emplace(std::move(f.key), f.acc);
            st.pop_back();
        }
        return ret;
    }
};

} // namespace

RunBudget derive_budget(const TransitionSystem& ts, std::int64_t width) {
    RunBudget b;
    detail::Box box;
    detail::refine_box(box, ts.theta0.conjuncts);
    for (auto& v : ts.variables) {
        if (v == kCostVar) {
            b.input_box[v] = {0, 0};
            continue;
        }
        detail::Interval iv = detail::box_get(box, v);
        // Variables without a derivable lower bound stay at the single
        // representative 0; program inputs are expected to carry bounds.
        std::int64_t lo = 0, hi = 0;
        if (!iv.empty && iv.lo && iv.lo->is_integer() && iv.lo->num().fits_slong_p()) {
            lo = iv.lo->num().get_si();
            hi = lo + width - 1;
            if (iv.hi && iv.hi->is_integer() && iv.hi->num().fits_slong_p())
                hi = std::min(hi, iv.hi->num().get_si());
        }
        b.input_box[v] = {lo, hi};
    }
    return b;
}

std::vector<Valuation> initial_points(const TransitionSystem& ts, const RunBudget& budget) {
    std::vector<std::string> vars;
    for (auto& v : ts.variables)
        vars.push_back(v);
    std::vector<Valuation> out;
    Valuation cur;
    // iterative cartesian product in variable order
    std::vector<std::int64_t> idx(vars.size());
    auto range_of = [&](const std::string& v) -> std::pair<std::int64_t, std::int64_t> {
        auto it = budget.input_box.find(v);
        if (it != budget.input_box.end())
            return it->second;
        return {0, 0};
    };
    for (std::size_t i = 0; i < vars.size(); ++i)
        idx[i] = range_of(vars[i]).first;
    for (;;) {
        Valuation x;
        for (std::size_t i = 0; i < vars.size(); ++i)
            x[vars[i]] = idx[i];
        if (ts.theta0.holds(x))
            out.push_back(std::move(x));
        std::size_t i = 0;
        for (; i < vars.size(); ++i) {
            if (idx[i] < range_of(vars[i]).second) {
                ++idx[i];
                for (std::size_t j = 0; j < i; ++j)
                    idx[j] = range_of(vars[j]).first;
                break;
            }
        }
        if (i == vars.size())
            break;
        if (out.size() > 2000000)
            throw SemanticError("input box too large to enumerate");
    }
    return out;
}

CostExtremes cost_extremes(const TransitionSystem& ts, const Valuation& x0,
                           const RunBudget& budget) {
    if (budget.max_steps <= 0)
        throw SemanticError("step budget must be positive");
    for (auto& v : ts.variables)
        if (!x0.count(v))
            throw SemanticError("initial valuation does not bind variable " + v);
    Engine eng(ts, budget);
    CostExtremes ce = eng.explore(ts.initial, x0);
    return ce;
}

std::int64_t max_diff(const TransitionSystem& ts_new, const TransitionSystem& ts_old,
                      const RunBudget& budget) {
    auto points = initial_points(ts_new, budget);
    if (points.empty())
        throw SemanticError("input box contains no Theta0 point");
    Engine enew(ts_new, budget);
    Engine eold(ts_old, budget);
    bool first = true;
    std::int64_t best = 0;
    for (auto& x0 : points) {
        CostExtremes n = enew.explore(ts_new.initial, x0);
        CostExtremes o = eold.explore(ts_old.initial, x0);
        std::int64_t d = n.sup - o.inf;
        if (first || d > best) {
            best = d;
            first = false;
        }
    }
    return best;
}

std::vector<std::pair<std::string, Valuation>>
enumerate_reachable(const TransitionSystem& ts, const RunBudget& budget) {
    Engine eng(ts, budget);
    std::vector<std::pair<std::string, Valuation>> out;
    std::set<std::pair<std::string, Valuation>> seen;
    std::deque<std::pair<std::string, Valuation>> queue;
    for (auto& x0 : initial_points(ts, budget))
        queue.push_back({ts.initial, x0});
    while (!queue.empty()) {
        auto cur = queue.front();
        queue.pop_front();
        if (!seen.insert(cur).second)
            continue;
        out.push_back(cur);
        if (static_cast<std::int64_t>(out.size()) >= budget.state_cap)
            break; // sampled prefix is all the caller gets
        if (cur.first == ts.terminal)
            continue;
        std::vector<std::pair<std::string, Valuation>> succs;
        eng.successors(cur.first, cur.second, succs);
        for (auto& s : succs)
            if (!seen.count(s))
                queue.push_back(std::move(s));
    }
    return out;
}

} // namespace diffcost
