// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/invariants.hpp"

#include "diffcost/parse.hpp"
#include "interval.hpp"
#include "lexer.hpp"

#include <algorithm>
#include <deque>

namespace diffcost {

using detail::Box;
using detail::Interval;

namespace {

// Post-state box of one transition from a source box: guard refinement, then
// update image. Returns bottom (empty optional) if the guard is unsatisfiable
// over the box.
std::optional<Box> transfer(const Transition& t, Box box) {
    if (!detail::refine_box(box, t.guard.conjuncts))
        return std::nullopt;
    Box out = box;
    for (auto& [v, e] : t.update.entries()) {
        if (auto* p = std::get_if<Polynomial>(&e)) {
            out[v] = detail::eval_interval(*p, box).tighten_int();
        } else {
            auto& nd = std::get<NondetUpdate>(e);
            Interval iv = Interval::top();
            if (nd.lower) {
                Interval lo = detail::eval_interval(nd.lower->poly(), box);
                if (!lo.empty && lo.lo)
                    iv.lo = lo.lo;
            }
            if (nd.upper) {
                Interval hi = detail::eval_interval(nd.upper->poly(), box);
                if (!hi.empty && hi.hi)
                    iv.hi = hi.hi;
            }
            out[v] = iv.tighten_int();
        }
    }
    return out;
}

Box theta0_box(const TransitionSystem& ts) {
    Box b;
    detail::refine_box(b, ts.theta0.conjuncts);
    return b;
}

bool box_equal(const Box& a, const Box& b, const TransitionSystem& ts) {
    for (auto& v : ts.variables)
        if (!(detail::box_get(a, v) == detail::box_get(b, v)))
            return false;
    return true;
}

Box join_boxes(const Box& a, const Box& b, const TransitionSystem& ts) {
    Box r;
    for (auto& v : ts.variables) {
        Interval j = detail::box_get(a, v).join(detail::box_get(b, v));
        if (!j.is_top())
            r[v] = j;
    }
    return r;
}

} // namespace

InvariantMap propagate_intervals(const TransitionSystem& ts, const PropagateOptions& opt) {
    // reached[l] absent = bottom (location not yet reached)
    std::map<std::string, Box> reached;
    std::map<std::string, int> joins;
    reached[ts.initial] = theta0_box(ts);

    std::deque<std::string> work{ts.initial};
    auto schedule = [&](const std::string& l) {
        if (std::find(work.begin(), work.end(), l) == work.end())
            work.push_back(l);
    };

    while (!work.empty()) {
        std::string loc = work.front();
        work.pop_front();
        auto src = reached.find(loc);
        if (src == reached.end())
            continue;
        for (auto& t : ts.transitions) {
            if (t.source != loc)
                continue;
            auto post = transfer(t, src->second);
            if (!post)
                continue;
            auto tgt = reached.find(t.target);
            if (tgt == reached.end()) {
                reached[t.target] = *post;
                schedule(t.target);
                continue;
            }
            Box joined = join_boxes(tgt->second, *post, ts);
            if (box_equal(joined, tgt->second, ts))
                continue;
            int visits = ++joins[t.target];
            if (visits >= opt.widen_after) {
                Box widened;
                for (auto& v : ts.variables) {
                    Interval w = detail::box_get(tgt->second, v)
                                     .widen(detail::box_get(joined, v));
                    if (!w.is_top())
                        widened[v] = w;
                }
                joined = widened;
                if (box_equal(joined, tgt->second, ts))
                    continue;
            }
            tgt->second = joined;
            schedule(t.target);
        }
    }

    // Narrowing: recompute every location's box from the freshest values and
    // keep the meet with the widened fixpoint. Meets only shrink boxes, so
    // the sweep count is capped to stay a narrowing (no re-widening cycles).
    for (std::size_t sweep = 0; sweep <= ts.locations.size(); ++sweep) {
        bool changed = false;
        for (auto& loc : ts.locations) {
            auto it = reached.find(loc);
            if (it == reached.end())
                continue;
            Box recomputed;
            bool seeded = false;
            if (loc == ts.initial) {
                recomputed = theta0_box(ts);
                seeded = true;
            }
            for (auto& t : ts.transitions) {
                if (t.target != loc)
                    continue;
                auto src = reached.find(t.source);
                if (src == reached.end())
                    continue;
                auto post = transfer(t, src->second);
                if (!post)
                    continue;
                recomputed = seeded ? join_boxes(recomputed, *post, ts) : *post;
                seeded = true;
            }
            if (!seeded)
                continue;
            Box met;
            for (auto& v : ts.variables) {
                Interval m =
                    detail::box_get(it->second, v).meet(detail::box_get(recomputed, v));
                if (!m.is_top())
                    met[v] = m;
            }
            if (!box_equal(met, it->second, ts)) {
                it->second = met;
                changed = true;
            }
        }
        if (!changed)
            break;
    }

    // Theta0 conjuncts over never-written variables hold everywhere.
    std::vector<AffineExpr> passthrough;
    for (auto& c : ts.theta0.conjuncts) {
        bool stable = true;
        for (auto& v : c.poly().variables())
            if (ts.is_written(v))
                stable = false;
        if (stable)
            passthrough.push_back(c);
    }

    InvariantMap inv;
    for (auto& loc : ts.locations) {
        Assertion a;
        auto it = reached.find(loc);
        if (it != reached.end()) {
            for (auto& v : ts.variables) {
                Interval iv = detail::box_get(it->second, v);
                if (iv.empty)
                    continue;
                if (iv.lo)
                    a.conjuncts.push_back(AffineExpr(Polynomial::var(v) - Polynomial(*iv.lo)));
                if (iv.hi)
                    a.conjuncts.push_back(AffineExpr(Polynomial(*iv.hi) - Polynomial::var(v)));
            }
        }
        for (auto& c : passthrough) {
            if (std::find(a.conjuncts.begin(), a.conjuncts.end(), c) == a.conjuncts.end())
                a.conjuncts.push_back(c);
        }
        inv.at[loc] = std::move(a);
    }
    return inv;
}

InvariantMap merge_annotations(const InvariantMap& base, const InvariantMap& user) {
    for (auto& [loc, a] : user.at)
        if (!base.at.count(loc))
            throw SemanticError("annotation for unknown location '" + loc + "'");
    for (auto& [loc, a] : base.at)
        if (!user.at.count(loc))
            throw SemanticError("annotation map misses location '" + loc + "'");
    InvariantMap out = base;
    for (auto& [loc, a] : user.at) {
        auto& dst = out.at[loc].conjuncts;
        for (auto& c : a.conjuncts)
            if (std::find(dst.begin(), dst.end(), c) == dst.end())
                dst.push_back(c);
    }
    return out;
}

InvariantMap parse_invariant_file(const std::string& text, const std::string& system_tag) {
    detail::Lexer lx(text, /*hash_comments=*/true);
    InvariantMap inv;
    while (!lx.at_end()) {
        lx.expect_kw("invariant");
        std::string first = lx.expect_ident();
        std::string loc;
        bool keep = true;
        if (lx.peek().kind == detail::Tok::Ident) {
            loc = lx.expect_ident();
            keep = (first == system_tag);
        } else {
            loc = first;
        }
        lx.expect(":");
        Assertion a = detail::parse_conjunction(lx, "invariant conjunct");
        lx.expect(";");
        if (!keep)
            continue;
        auto& dst = inv.at[loc].conjuncts;
        for (auto& c : a.conjuncts)
            if (std::find(dst.begin(), dst.end(), c) == dst.end())
                dst.push_back(c);
    }
    return inv;
}

InvariantMap complete_invariants(const TransitionSystem& ts, const InvariantMap& sparse) {
    for (auto& [loc, a] : sparse.at) {
        if (!ts.has_location(loc))
            throw SemanticError("invariant annotation for unknown location '" + loc + "'");
        for (auto& c : a.conjuncts)
            for (auto& v : c.poly().variables())
                if (!ts.has_variable(v))
                    throw SemanticError("invariant at '" + loc + "' uses unknown variable " + v);
    }
    InvariantMap out;
    for (auto& loc : ts.locations) {
        auto it = sparse.at.find(loc);
        out.at[loc] = it == sparse.at.end() ? Assertion{} : it->second;
    }
    return out;
}

InvariantCheckReport check_invariant_sampled(const TransitionSystem& ts, const InvariantMap& inv,
                                             std::int64_t state_budget, const RunBudget& rb) {
    if (state_budget <= 0)
        throw SemanticError("state budget must be positive");
    RunBudget capped = rb;
    capped.state_cap = state_budget;
    InvariantCheckReport rep;
    auto states = enumerate_reachable(ts, capped);
    for (auto& [loc, x] : states) {
        ++rep.states_checked;
        const Assertion& a = inv.of(loc);
        for (auto& c : a.conjuncts) {
            if (c.eval(x).sign() < 0) {
                rep.ok = false;
                rep.violation = InvariantViolation{loc, x, c.str() + " >= 0"};
                return rep;
            }
        }
    }
    return rep;
}

} // namespace diffcost
