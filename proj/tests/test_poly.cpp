// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/poly.hpp"

#include <doctest.h>

#include <random>

using namespace diffcost;

namespace {

Polynomial random_poly(std::mt19937& rng, const std::vector<std::string>& vars, int max_deg) {
    std::uniform_int_distribution<int> coeff(-4, 4);
    std::uniform_int_distribution<int> nterms(1, 5);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(vars.size()) - 1);
    std::uniform_int_distribution<int> deg(0, max_deg);
    Polynomial p;
    int n = nterms(rng);
    for (int i = 0; i < n; ++i) {
        Monomial m;
        int d = deg(rng);
        for (int k = 0; k < d; ++k)
            m = m * Monomial(vars[pick(rng)]);
        p.add_term(m, Rational(coeff(rng)));
    }
    return p;
}

Valuation random_valuation(std::mt19937& rng, const std::vector<std::string>& vars) {
    std::uniform_int_distribution<int> val(-5, 5);
    Valuation x;
    for (auto& v : vars)
        x[v] = val(rng);
    return x;
}

} // namespace

TEST_CASE("rational basics") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK(Rational(-3, -6) == Rational(1, 2));
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational::parse("99.94") == Rational(9994, 100));
    CHECK(Rational::parse("3/4") == Rational(3, 4));
    CHECK(Rational(9994, 100).floor() == 99);
    CHECK(Rational(-1, 2).floor() == -1);
    CHECK(Rational(-1, 2).ceil() == 0);
    CHECK_THROWS(Rational(1, 0));
}

TEST_CASE("polynomial evaluation matches hand-computed values") {
    // lenA*lenB at lenA=lenB=100: the join pair threshold at the box corner
    Polynomial p = Polynomial::var("lenA") * Polynomial::var("lenB");
    Valuation x{{"lenA", 100}, {"lenB", 100}};
    CHECK(p.eval(x) == Rational(10000));

    CHECK(Polynomial().eval(x) == Rational(0));

    // 2*(lenB - i)*lenA - 2*j at lenB=3, i=1, lenA=2, j=1
    Polynomial q = (Polynomial(2) * (Polynomial::var("lenB") - Polynomial::var("i")) *
                    Polynomial::var("lenA")) -
                   Polynomial(2) * Polynomial::var("j");
    Valuation y{{"lenB", 3}, {"i", 1}, {"lenA", 2}, {"j", 1}};
    CHECK(q.eval(y) == Rational(6));

    CHECK_THROWS(p.eval(Valuation{{"lenA", 1}}));
}

TEST_CASE("polynomial ring laws hold at random points") {
    std::mt19937 rng(7);
    std::vector<std::string> vars{"x", "y", "z"};
    for (int i = 0; i < 200; ++i) {
        Polynomial p = random_poly(rng, vars, 3);
        Polynomial q = random_poly(rng, vars, 3);
        Valuation x = random_valuation(rng, vars);
        CHECK((p + q).eval(x) == p.eval(x) + q.eval(x));
        CHECK((p * q).eval(x) == p.eval(x) * q.eval(x));
        CHECK((p - q).eval(x) == p.eval(x) - q.eval(x));
    }
}

TEST_CASE("monomial enumeration is canonical graded-lex") {
    auto ms = monomials({"x", "y"}, 2);
    REQUIRE(ms.size() == 6); // C(4,2)
    CHECK(ms[0].str() == "1");
    CHECK(ms[1].str() == "x");
    CHECK(ms[2].str() == "y");
    CHECK(ms[3].str() == "x^2");
    CHECK(ms[4].str() == "x*y");
    CHECK(ms[5].str() == "y^2");

    CHECK(monomials({"x"}, 0).size() == 1);
    CHECK(monomials({"x"}, 0)[0].is_one());

    // C(6,3) = 20, cross-checked by enumeration
    auto m3 = monomials({"a", "b", "c"}, 3);
    CHECK(m3.size() == 20);
    long count = 0;
    for (int ea = 0; ea <= 3; ++ea)
        for (int eb = 0; eb <= 3; ++eb)
            for (int ec = 0; ec <= 3; ++ec)
                if (ea + eb + ec <= 3)
                    ++count;
    CHECK(count == 20);
}

TEST_CASE("zero coefficients never stored") {
    Polynomial p = Polynomial::var("x") - Polynomial::var("x");
    CHECK(p.is_zero());
    CHECK(p.terms().empty());
    Polynomial q = Polynomial::var("x") * Polynomial(0);
    CHECK(q.is_zero());
}

TEST_CASE("affine expressions reject higher degree") {
    CHECK_THROWS(AffineExpr(Polynomial::var("x") * Polynomial::var("x")));
    CHECK_NOTHROW(AffineExpr(Polynomial::var("x") - Polynomial(1)));
}

TEST_CASE("substitution expands binomials") {
    std::map<std::string, Polynomial> sub{{"x", Polynomial::var("x") + Polynomial(1)}};
    Polynomial x2 = Polynomial::var("x") * Polynomial::var("x");
    Polynomial expanded = x2.subst(sub);
    Polynomial expect = x2 + Polynomial(2) * Polynomial::var("x") + Polynomial(1);
    CHECK(expanded == expect);
}
