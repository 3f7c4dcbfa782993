// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/poly.hpp"

#include <sstream>

namespace diffcost {

bool Monomial::operator<(const Monomial& o) const {
    int da = degree(), db = o.degree();
    if (da != db)
        return da < db;
    // Same degree: higher exponent on the alphabetically earlier variable
    // sorts first, giving x^2 < x*y < y^2.
    auto a = exps_.begin(), b = o.exps_.begin();
    while (a != exps_.end() && b != o.exps_.end()) {
        if (a->first != b->first)
            return a->first < b->first;
        if (a->second != b->second)
            return a->second > b->second;
        ++a;
        ++b;
    }
    return false; // identical
}

std::string Monomial::str() const {
    if (exps_.empty())
        return "1";
    std::ostringstream os;
    bool first = true;
    for (auto& [v, e] : exps_) {
        if (!first)
            os << "*";
        first = false;
        os << v;
        if (e != 1)
            os << "^" << e;
    }
    return os.str();
}

Polynomial Polynomial::operator-() const {
    Polynomial r;
    for (auto& [m, c] : terms_)
        r.terms_[m] = -c;
    return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    for (auto& [m, c] : o.terms_)
        add_term(m, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
    for (auto& [m, c] : o.terms_)
        add_term(m, -c);
    return *this;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    Polynomial r;
    for (auto& [ma, ca] : terms_)
        for (auto& [mb, cb] : o.terms_)
            r.add_term(ma * mb, ca * cb);
    return r;
}

Polynomial Polynomial::operator*(const Rational& c) const {
    Polynomial r;
    if (c.is_zero())
        return r;
    for (auto& [m, k] : terms_)
        r.terms_[m] = k * c;
    return r;
}

Rational Polynomial::eval(const Valuation& x) const {
    Rational acc(0);
    for (auto& [m, c] : terms_) {
        Rational t = c;
        for (auto& [v, e] : m.exponents()) {
            auto it = x.find(v);
            if (it == x.end())
                throw std::invalid_argument("eval: unbound variable " + v);
            Rational base(static_cast<long>(it->second));
            for (int i = 0; i < e; ++i)
                t *= base;
        }
        acc += t;
    }
    return acc;
}

Polynomial Polynomial::subst(const std::map<std::string, Polynomial>& sub) const {
    Polynomial acc;
    for (auto& [m, c] : terms_) {
        Polynomial t(c);
        for (auto& [v, e] : m.exponents()) {
            auto it = sub.find(v);
            Polynomial base = (it == sub.end()) ? Polynomial::var(v) : it->second;
            for (int i = 0; i < e; ++i)
                t = t * base;
        }
        acc += t;
    }
    return acc;
}

std::string Polynomial::str() const {
    if (terms_.empty())
        return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [m, c] : terms_) {
        Rational a = c;
        if (first) {
            if (a.sign() < 0) {
                os << "-";
                a = -a;
            }
        } else {
            os << (a.sign() < 0 ? " - " : " + ");
            if (a.sign() < 0)
                a = -a;
        }
        first = false;
        if (m.is_one())
            os << a.str();
        else if (a == Rational(1))
            os << m.str();
        else
            os << a.str() << "*" << m.str();
    }
    return os.str();
}

std::string Assertion::str() const {
    if (conjuncts.empty())
        return "true";
    std::ostringstream os;
    for (std::size_t i = 0; i < conjuncts.size(); ++i) {
        if (i)
            os << ", ";
        os << conjuncts[i].str() << " >= 0";
    }
    return os.str();
}

namespace {
void enumerate_monomials(const std::vector<std::string>& vars, std::size_t i, int budget,
                         Monomial cur, std::vector<Monomial>& out) {
    if (i == vars.size()) {
        out.push_back(cur);
        return;
    }
    for (int e = 0; e <= budget; ++e) {
        Monomial next = cur;
        if (e > 0)
            next = next * Monomial(vars[i], e);
        enumerate_monomials(vars, i + 1, budget - e, next, out);
    }
}
} // namespace

std::vector<Monomial> monomials(const std::vector<std::string>& vars, int d) {
    if (d < 0)
        throw std::invalid_argument("monomials: negative degree");
    std::vector<Monomial> out;
    enumerate_monomials(vars, 0, d, Monomial(), out);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace diffcost
