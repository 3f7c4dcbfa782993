// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "diffcost/poly.hpp"

#include <map>
#include <optional>
#include <string>

namespace diffcost::detail {

// Closed interval over the rationals with optional infinities. Empty is
// represented explicitly. Integer tightening is applied by callers where
// integrality of the program semantics permits it.
struct Interval {
    bool empty = false;
    std::optional<Rational> lo; // nullopt = -inf
    std::optional<Rational> hi; // nullopt = +inf

    static Interval top() { return {}; }
    static Interval bottom() {
        Interval i;
        i.empty = true;
        return i;
    }
    static Interval point(const Rational& v) { return {false, v, v}; }
    static Interval range(const Rational& a, const Rational& b) {
        if (a > b)
            return bottom();
        return {false, a, b};
    }

    bool is_top() const { return !empty && !lo && !hi; }

    bool operator==(const Interval& o) const {
        return empty == o.empty && lo == o.lo && hi == o.hi;
    }

    Interval join(const Interval& o) const {
        if (empty)
            return o;
        if (o.empty)
            return *this;
        Interval r;
        if (lo && o.lo)
            r.lo = std::min(*lo, *o.lo);
        if (hi && o.hi)
            r.hi = std::max(*hi, *o.hi);
        return r;
    }
    Interval meet(const Interval& o) const {
        if (empty || o.empty)
            return bottom();
        Interval r;
        if (lo && o.lo)
            r.lo = std::max(*lo, *o.lo);
        else
            r.lo = lo ? lo : o.lo;
        if (hi && o.hi)
            r.hi = std::min(*hi, *o.hi);
        else
            r.hi = hi ? hi : o.hi;
        if (r.lo && r.hi && *r.lo > *r.hi)
            return bottom();
        return r;
    }
    // Standard widening: bounds that moved outward go to infinity.
    Interval widen(const Interval& next) const {
        if (empty)
            return next;
        if (next.empty)
            return *this;
        Interval r;
        if (lo && next.lo && *next.lo >= *lo)
            r.lo = lo;
        if (hi && next.hi && *next.hi <= *hi)
            r.hi = hi;
        return r;
    }

    Interval operator+(const Interval& o) const {
        if (empty || o.empty)
            return bottom();
        Interval r;
        if (lo && o.lo)
            r.lo = *lo + *o.lo;
        if (hi && o.hi)
            r.hi = *hi + *o.hi;
        return r;
    }
    Interval operator-() const {
        if (empty)
            return bottom();
        Interval r;
        if (hi)
            r.lo = -*hi;
        if (lo)
            r.hi = -*lo;
        return r;
    }
    Interval operator-(const Interval& o) const { return *this + (-o); }

    Interval scale(const Rational& c) const {
        if (empty)
            return bottom();
        if (c.is_zero())
            return point(Rational(0));
        Interval r;
        if (c.sign() > 0) {
            if (lo)
                r.lo = *lo * c;
            if (hi)
                r.hi = *hi * c;
        } else {
            if (hi)
                r.lo = *hi * c;
            if (lo)
                r.hi = *lo * c;
        }
        return r;
    }

    Interval operator*(const Interval& o) const {
        if (empty || o.empty)
            return bottom();
        // Unbounded factors make everything escape unless one side is the
        // exact zero point.
        if (*this == point(Rational(0)) || o == point(Rational(0)))
            return point(Rational(0));
        if (!lo || !hi || !o.lo || !o.hi) {
            // Conservative: keep a finite bound only in the easy same-sign
            // nonneg cases; otherwise top.
            bool a_nonneg = lo && lo->sign() >= 0;
            bool b_nonneg = o.lo && o.lo->sign() >= 0;
            Interval r;
            if (a_nonneg && b_nonneg)
                r.lo = *lo * *o.lo;
            return r;
        }
        Rational cands[4] = {*lo * *o.lo, *lo * *o.hi, *hi * *o.lo, *hi * *o.hi};
        Rational mn = cands[0], mx = cands[0];
        for (int i = 1; i < 4; ++i) {
            mn = std::min(mn, cands[i]);
            mx = std::max(mx, cands[i]);
        }
        return range(mn, mx);
    }

    // Tightens to the integral sublattice.
    Interval tighten_int() const {
        if (empty)
            return bottom();
        Interval r = *this;
        if (r.lo)
            r.lo = Rational(r.lo->ceil());
        if (r.hi)
            r.hi = Rational(r.hi->floor());
        if (r.lo && r.hi && *r.lo > *r.hi)
            return bottom();
        return r;
    }
};

using Box = std::map<std::string, Interval>; // missing entry = top

inline Interval box_get(const Box& b, const std::string& v) {
    auto it = b.find(v);
    return it == b.end() ? Interval::top() : it->second;
}

inline Interval eval_interval(const Polynomial& p, const Box& b) {
    Interval acc = Interval::point(Rational(0));
    for (auto& [m, c] : p.terms()) {
        Interval t = Interval::point(Rational(1));
        for (auto& [v, e] : m.exponents()) {
            Interval base = box_get(b, v);
            for (int i = 0; i < e; ++i)
                t = t * base;
        }
        acc = acc + t.scale(c);
    }
    return acc;
}

// Refines variable bounds in `b` using affine conjuncts read as expr >= 0.
// Each conjunct sum(a_i * v_i) + c >= 0 bounds every variable it mentions in
// terms of the current bounds of the others. Runs a few sweeps; integral
// tightening is applied. Returns false if the box became empty.
inline bool refine_box(Box& b, const std::vector<AffineExpr>& conjuncts, int sweeps = 3) {
    for (int pass = 0; pass < sweeps; ++pass) {
        for (auto& conj : conjuncts) {
            const Polynomial& p = conj.poly();
            for (auto& [m, a] : p.terms()) {
                if (m.is_one())
                    continue;
                const std::string& v = m.exponents().begin()->first;
                // rest = p - a*v evaluated over the box
                Polynomial rest = p - Polynomial::term(a, m);
                Interval ri = eval_interval(rest, b);
                // a*v + rest >= 0  =>  v >= -rest_hi/a (a>0), v <= -rest_lo/a... sides:
                Interval cur = box_get(b, v);
                if (a.sign() > 0) {
                    if (ri.empty)
                        return false;
                    if (ri.hi) {
                        Rational bound = -*ri.hi / a;
                        Interval nb = cur.meet({false, bound, std::nullopt}).tighten_int();
                        if (nb.empty)
                            return false;
                        b[v] = nb;
                    }
                } else {
                    if (ri.empty)
                        return false;
                    if (ri.hi) {
                        Rational bound = -*ri.hi / a; // a < 0: v <= bound
                        Interval nb = cur.meet({false, std::nullopt, bound}).tighten_int();
                        if (nb.empty)
                            return false;
                        b[v] = nb;
                    }
                }
            }
            // Direct emptiness: constant conjunct below zero.
            if (p.is_constant() && p.constant_term().sign() < 0)
                return false;
        }
    }
    return true;
}

} // namespace diffcost::detail
