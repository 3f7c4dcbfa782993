// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "diffcost/rational.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace diffcost {

/// Integer state: total map variable-name -> value.
using Valuation = std::map<std::string, std::int64_t>;

/// Power product over named variables. Zero exponents are never stored; the
/// empty map is the monomial 1. Ordering is graded lexicographic so that map
/// iteration over polynomials enumerates terms canonically (1, x, y, x^2,
/// x*y, y^2, ...).
class Monomial {
  public:
    Monomial() = default;
    explicit Monomial(const std::string& var, int exp = 1) {
        if (exp < 0)
            throw std::invalid_argument("Monomial: negative exponent");
        if (exp > 0)
            exps_[var] = exp;
    }

    int degree() const {
        int d = 0;
        for (auto& [v, e] : exps_)
            d += e;
        return d;
    }
    bool is_one() const { return exps_.empty(); }
    int exponent(const std::string& var) const {
        auto it = exps_.find(var);
        return it == exps_.end() ? 0 : it->second;
    }
    const std::map<std::string, int>& exponents() const { return exps_; }

    Monomial operator*(const Monomial& o) const {
        Monomial r = *this;
        for (auto& [v, e] : o.exps_)
            r.exps_[v] += e;
        return r;
    }

    bool operator==(const Monomial& o) const { return exps_ == o.exps_; }
    bool operator!=(const Monomial& o) const { return exps_ != o.exps_; }
    bool operator<(const Monomial& o) const;

    std::string str() const;

  private:
    std::map<std::string, int> exps_;
};

/// Sparse multivariate polynomial with exact rational coefficients. Zero
/// coefficients are never stored; the zero polynomial has no terms.
class Polynomial {
  public:
    Polynomial() = default;
    Polynomial(const Rational& c) {
        if (!c.is_zero())
            terms_[Monomial()] = c;
    }
    Polynomial(long c) : Polynomial(Rational(c)) {}
    static Polynomial var(const std::string& name) {
        Polynomial p;
        p.terms_[Monomial(name)] = Rational(1);
        return p;
    }
    static Polynomial term(const Rational& c, const Monomial& m) {
        Polynomial p;
        if (!c.is_zero())
            p.terms_[m] = c;
        return p;
    }

    const std::map<Monomial, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one());
    }
    Rational constant_term() const {
        auto it = terms_.find(Monomial());
        return it == terms_.end() ? Rational(0) : it->second;
    }
    Rational coeff(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? Rational(0) : it->second;
    }
    int degree() const {
        int d = 0;
        for (auto& [m, c] : terms_)
            d = std::max(d, m.degree());
        return d;
    }
    std::set<std::string> variables() const {
        std::set<std::string> vs;
        for (auto& [m, c] : terms_)
            for (auto& [v, e] : m.exponents())
                vs.insert(v);
        return vs;
    }

    void add_term(const Monomial& m, const Rational& c) {
        if (c.is_zero())
            return;
        auto [it, fresh] = terms_.emplace(m, c);
        if (!fresh) {
            it->second += c;
            if (it->second.is_zero())
                terms_.erase(it);
        }
    }

    Polynomial operator-() const;
    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);
    Polynomial operator+(const Polynomial& o) const {
        Polynomial r = *this;
        return r += o;
    }
    Polynomial operator-(const Polynomial& o) const {
        Polynomial r = *this;
        return r -= o;
    }
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(const Rational& c) const;

    bool operator==(const Polynomial& o) const { return terms_ == o.terms_; }
    bool operator!=(const Polynomial& o) const { return terms_ != o.terms_; }
    bool operator<(const Polynomial& o) const { return terms_ < o.terms_; }

    /// Exact evaluation; throws if some variable of the polynomial is unbound.
    Rational eval(const Valuation& x) const;

    /// Simultaneous substitution of variables by polynomials; variables
    /// without an entry stay themselves.
    Polynomial subst(const std::map<std::string, Polynomial>& sub) const;

    std::string str() const;

  private:
    std::map<Monomial, Rational> terms_;
};

/// Polynomial of degree <= 1, the shape required of guards, Theta0 conjuncts
/// and invariants. Interpreted as expr >= 0 wherever used as a constraint.
class AffineExpr {
  public:
    AffineExpr() = default;
    explicit AffineExpr(Polynomial p) : p_(std::move(p)) {
        if (p_.degree() > 1)
            throw std::invalid_argument("AffineExpr: degree > 1: " + p_.str());
    }
    const Polynomial& poly() const { return p_; }
    Rational eval(const Valuation& x) const { return p_.eval(x); }
    bool operator==(const AffineExpr& o) const { return p_ == o.p_; }
    bool operator<(const AffineExpr& o) const { return p_ < o.p_; }
    std::string str() const { return p_.str(); }

  private:
    Polynomial p_;
};

/// Conjunction of affine inequalities, each conjunct read as expr >= 0.
struct Assertion {
    std::vector<AffineExpr> conjuncts;

    bool holds(const Valuation& x) const {
        for (auto& c : conjuncts)
            if (c.eval(x).sign() < 0)
                return false;
        return true;
    }
    bool is_true() const { return conjuncts.empty(); }
    bool operator==(const Assertion& o) const { return conjuncts == o.conjuncts; }
    std::string str() const;
};

/// All monomials of total degree <= d over the given variables, in graded
/// lexicographic order. Count is C(|vars|+d, d).
std::vector<Monomial> monomials(const std::vector<std::string>& vars, int d);

} // namespace diffcost
