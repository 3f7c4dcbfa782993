// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/constraints.hpp"
#include "diffcost/parse.hpp"

#include <doctest.h>

#include <random>

using namespace diffcost;

namespace {

// minimal valid system: l -> l with cost+1, x+1; l -> lout; lout self-loop
TransitionSystem tiny_loop() {
    const char* text = R"(
vars x cost;
init l;
terminal lout;
theta0 x >= 0, 3 - x >= 0, cost >= 0, -cost >= 0;
trans l -> l guard 3 - x >= 1 update x := x + 1, cost := cost + 1;
trans l -> lout guard x - 3 >= 0;
)";
    return parse_transition_system(text);
}

InvariantMap trivial_inv(const TransitionSystem& ts) {
    InvariantMap inv;
    for (auto& l : ts.locations)
        inv.at[l] = Assertion{};
    return inv;
}

const ImplicationConstraint& find_tagged(const std::vector<ImplicationConstraint>& cs,
                                         const std::string& tag) {
    for (auto& c : cs)
        if (c.tag == tag)
            return c;
    REQUIRE(false);
    static ImplicationConstraint dummy;
    return dummy;
}

} // namespace

TEST_CASE("template counts follow the closed formula") {
    TransitionSystem ts = tiny_loop(); // 2 locations, vars {x, cost}
    VarPool pool;
    TemplateMap t2 = fix_templates(ts, 2, "a", /*include_cost=*/false, pool);
    // cost excluded: vars {x}; C(1+2,2) = 3 monomials per location
    CHECK(t2.at.at("l").size() == 3);
    CHECK(pool.size() == 6);

    VarPool pool0;
    TemplateMap t0 = fix_templates(ts, 0, "b", false, pool0);
    CHECK(t0.at.at("l").size() == 1);
    CHECK(t0.at.at("lout").size() == 1);

    // golden join system: 5 locations, 4 non-cost vars, d=2 -> 5 * C(6,2) = 75
    TransitionSystem join = parse_file(std::string(DIFFCOST_SOURCE_DIR) +
                                       "/benchmarks/join_old.ts");
    VarPool pj;
    TemplateMap tj = fix_templates(join, 2, "old", false, pj);
    std::size_t total = 0;
    for (auto& [loc, slot] : tj.at)
        total += slot.size();
    CHECK(total == 75);
}

TEST_CASE("substitute_update handles polynomials and fresh nondet names") {
    Update up;
    up.set("x", Polynomial::var("x") + Polynomial(1));
    CHECK(substitute_update(Polynomial::var("x"), up, "t0") ==
          Polynomial::var("x") + Polynomial(1));
    Polynomial x2 = Polynomial::var("x") * Polynomial::var("x");
    CHECK(substitute_update(x2, up, "t0") ==
          x2 + Polynomial(2) * Polynomial::var("x") + Polynomial(1));

    Update nd;
    nd.set_nondet("y", {});
    CHECK(substitute_update(Polynomial::var("y"), nd, "t3") == Polynomial::var("y@t3"));
}

TEST_CASE("pf constraint on a unit-cost self-loop collapses to -a - 1 >= 0") {
    TransitionSystem ts = tiny_loop();
    VarPool pool;
    TemplateMap tmpl = fix_templates(ts, 1, "s", false, pool); // a*x + b per location
    auto cs = collect_pf_constraints(ts, trivial_inv(ts), tmpl);
    const auto& c = find_tagged(cs, "pf:s:t0");

    // phi(l) = b + a*x; conclusion (a x + b) - (a(x+1) + b) - 1 = -a - 1
    int a_var = tmpl.at.at("l").at(Monomial("x"));
    REQUIRE(c.conclusion.size() == 1);
    const LinearCombo& combo = c.conclusion.at(Monomial());
    CHECK(combo.constant == Rational(-1));
    REQUIRE(combo.coeffs.size() == 1);
    CHECK(combo.coeffs.at(a_var) == Rational(-1));

    // dual anti-pf: (a(x+1) + b) + 1 - (a x + b) = a + 1
    auto as = collect_antipf_constraints(ts, trivial_inv(ts), tmpl);
    const auto& d = find_tagged(as, "anti:s:t0");
    const LinearCombo& dc = d.conclusion.at(Monomial());
    CHECK(dc.constant == Rational(1));
    CHECK(dc.coeffs.at(a_var) == Rational(1));
}

TEST_CASE("terminal self-loop yields the trivially satisfiable constraint") {
    TransitionSystem ts = tiny_loop();
    VarPool pool;
    TemplateMap tmpl = fix_templates(ts, 1, "s", false, pool);
    auto cs = collect_antipf_constraints(ts, trivial_inv(ts), tmpl);
    // the terminal self-loop has identity update and zero cost delta: the
    // conclusion cancels entirely and the constraint is dropped as 0 >= 0
    for (auto& c : cs)
        if (c.tag == "anti:s:t2")
            CHECK(c.conclusion.empty());
}

TEST_CASE("nondet update introduces its fresh name and bound premises") {
    const char* text = R"(
vars x y cost;
init l;
terminal lout;
theta0 x >= 0, 3 - x >= 0, cost >= 0, -cost >= 0;
trans l -> l guard 3 - x >= 1 update x := x + 1, y := nondet in [0, x], cost := cost + 1;
trans l -> lout guard x - 3 >= 0;
)";
    TransitionSystem ts = parse_transition_system(text);
    VarPool pool;
    TemplateMap tmpl = fix_templates(ts, 1, "s", false, pool);
    auto cs = collect_pf_constraints(ts, trivial_inv(ts), tmpl);
    const auto& c = find_tagged(cs, "pf:s:t0");
    bool fresh_in_conclusion = false;
    for (auto& [m, combo] : c.conclusion)
        if (m.exponent("y@t0") > 0)
            fresh_in_conclusion = true;
    CHECK(fresh_in_conclusion);
    bool lower_premise = false, upper_premise = false;
    for (auto& p : c.premises) {
        if (p.poly() == Polynomial::var("y@t0"))
            lower_premise = true;
        if (p.poly() == Polynomial::var("x") - Polynomial::var("y@t0"))
            upper_premise = true;
    }
    CHECK(lower_premise);
    CHECK(upper_premise);
}

TEST_CASE("nondeterministic cost update is rejected") {
    const char* text = R"(
vars cost;
init l;
terminal lout;
theta0 cost >= 0, -cost >= 0;
trans l -> l update cost := nondet;
trans l -> lout;
)";
    TransitionSystem ts = parse_transition_system(text);
    VarPool pool;
    TemplateMap tmpl = fix_templates(ts, 1, "s", false, pool);
    CHECK_THROWS_AS(collect_pf_constraints(ts, trivial_inv(ts), tmpl), SemanticError);
}

TEST_CASE("diffcost constraint holds under the running-example annotations") {
    // phi_new = 2*lenB*lenA, chi_old = lenA*lenB: conclusion evaluates to
    // t - lenA*lenB, satisfied with t = 10000 on the box, violated at t = 9999.
    TransitionSystem ts = parse_file(std::string(DIFFCOST_SOURCE_DIR) +
                                     "/benchmarks/join_old.ts");
    VarPool pool;
    int t_var = pool.intern("t", false);
    TemplateMap tnew = fix_templates(ts, 2, "new", false, pool);
    TemplateMap told = fix_templates(ts, 2, "old", false, pool);
    auto c = collect_diffcost_constraint(ts.theta0, tnew, "l0", told, "l0", t_var);

    std::map<int, Rational> assignment;
    Monomial ab = Monomial("lenA") * Monomial("lenB");
    assignment[tnew.at.at("l0").at(ab)] = Rational(2);
    assignment[told.at.at("l0").at(ab)] = Rational(1);

    auto eval_conclusion = [&](const Rational& t, const Valuation& x) {
        assignment[t_var] = t;
        Rational acc(0);
        for (auto& [m, combo] : c.conclusion) {
            Polynomial mono = Polynomial::term(Rational(1), m);
            acc += combo.eval(assignment) * mono.eval(x);
        }
        return acc;
    };
    Valuation corner{{"lenA", 100}, {"lenB", 100}, {"i", 0}, {"j", 0}, {"cost", 0}};
    CHECK(eval_conclusion(Rational(10000), corner) == Rational(0));
    CHECK(eval_conclusion(Rational(9999), corner) < Rational(0));
    Valuation small{{"lenA", 3}, {"lenB", 2}, {"i", 0}, {"j", 0}, {"cost", 0}};
    CHECK(eval_conclusion(Rational(10000), small) > Rational(0));
}

TEST_CASE("symbolic bound degree is checked") {
    TransitionSystem ts = tiny_loop();
    VarPool pool;
    TemplateMap a = fix_templates(ts, 1, "n", false, pool);
    TemplateMap b = fix_templates(ts, 1, "o", false, pool);
    Polynomial quad = Polynomial::var("x") * Polynomial::var("x");
    CHECK_THROWS_AS(
        collect_symbolic_bound_constraint(ts.theta0, a, "l", b, "l", quad), SemanticError);
    CHECK_NOTHROW(
        collect_symbolic_bound_constraint(ts.theta0, a, "l", b, "l", Polynomial::var("x")));
}

TEST_CASE("refutation mode mirrors certification with swapped roles plus ground witness") {
    TransitionSystem ts = tiny_loop();
    VarPool pool;
    TemplateMap anti_new = fix_templates(ts, 1, "newanti", false, pool);
    TemplateMap pf_old = fix_templates(ts, 1, "oldpf", false, pool);
    Valuation x0{{"x", 0}, {"cost", 0}};
    auto cs = collect_refutation_constraints(ts, trivial_inv(ts), anti_new, ts,
                                             trivial_inv(ts), pf_old, x0, Rational(5),
                                             Rational(1));

    // same counts as running certification with the roles swapped, plus one
    VarPool pool2;
    TemplateMap anti2 = fix_templates(ts, 1, "newanti", false, pool2);
    TemplateMap pf2 = fix_templates(ts, 1, "oldpf", false, pool2);
    auto anti_cs = collect_antipf_constraints(ts, trivial_inv(ts), anti2);
    auto pf_cs = collect_pf_constraints(ts, trivial_inv(ts), pf2);
    CHECK(cs.size() == anti_cs.size() + pf_cs.size() + 1);
    const auto& ground = cs.back();
    CHECK(ground.tag == "refute-ground");
    CHECK(ground.premises.empty());
    REQUIRE(ground.conclusion.count(Monomial()));
    CHECK(ground.conclusion.at(Monomial()).constant == Rational(-6)); // -(t + eps)

    Valuation bad{{"x", -1}, {"cost", 0}};
    CHECK_THROWS_AS(collect_refutation_constraints(ts, trivial_inv(ts), anti_new, ts,
                                                   trivial_inv(ts), pf_old, bad, Rational(5),
                                                   Rational(1)),
                    SemanticError);
}

TEST_CASE("every conclusion coefficient is linear in template unknowns") {
    // structural by the LinearCombo type; spot-check that nontrivial combos
    // carry first-degree references only (no encoded products)
    TransitionSystem ts = tiny_loop();
    VarPool pool;
    TemplateMap tmpl = fix_templates(ts, 2, "s", false, pool);
    auto cs = collect_pf_constraints(ts, trivial_inv(ts), tmpl);
    bool saw_var = false;
    for (auto& c : cs)
        for (auto& [m, combo] : c.conclusion)
            for (auto& [v, k] : combo.coeffs) {
                CHECK(v >= 0);
                CHECK(v < static_cast<int>(pool.size()));
                saw_var = true;
            }
    CHECK(saw_var);
}

TEST_CASE("pure cost premises are dropped when cost cannot reach the conclusion") {
    TransitionSystem ts = tiny_loop();
    VarPool pool;
    TemplateMap tmpl = fix_templates(ts, 1, "s", false, pool);
    InvariantMap inv = trivial_inv(ts);
    inv.at["l"].conjuncts.push_back(AffineExpr(Polynomial::var("cost")));
    auto cs = collect_pf_constraints(ts, inv, tmpl);
    for (auto& c : cs)
        for (auto& p : c.premises)
            CHECK(p.poly() != Polynomial::var("cost"));
}

TEST_CASE("substitute_update composed with eval equals eval after the update") {
    std::mt19937 rng(41);
    std::uniform_int_distribution<int> coeff(-3, 3);
    std::uniform_int_distribution<int> val(-4, 4);
    std::vector<std::string> vars{"x", "y"};
    for (int iter = 0; iter < 100; ++iter) {
        // random deterministic update of degree <= 2
        Update up;
        for (auto& v : vars) {
            Polynomial p(coeff(rng));
            p += Polynomial(coeff(rng)) * Polynomial::var("x");
            p += Polynomial(coeff(rng)) * Polynomial::var("y");
            if (iter % 2)
                p += Polynomial(coeff(rng)) * Polynomial::var("x") * Polynomial::var("y");
            up.set(v, p);
        }
        Polynomial body(coeff(rng));
        body += Polynomial(coeff(rng)) * Polynomial::var("x") * Polynomial::var("x");
        body += Polynomial(coeff(rng)) * Polynomial::var("y");

        Valuation x;
        x["x"] = val(rng);
        x["y"] = val(rng);
        Valuation updated;
        for (auto& v : vars) {
            auto e = up.entry(v);
            updated[v] = std::get<Polynomial>(e).eval(x).floor().get_si();
        }
        CHECK(substitute_update(body, up, "t0").eval(x) == body.eval(updated));
    }
}

TEST_CASE("refutation constraints structurally equal swapped certification constraints") {
    TransitionSystem ts = tiny_loop();
    VarPool pool;
    TemplateMap anti_new = fix_templates(ts, 1, "newanti", false, pool);
    TemplateMap pf_old = fix_templates(ts, 1, "oldpf", false, pool);
    Valuation x0{{"x", 0}, {"cost", 0}};
    auto refute = collect_refutation_constraints(ts, trivial_inv(ts), anti_new, ts,
                                                 trivial_inv(ts), pf_old, x0, Rational(5),
                                                 Rational(1));

    VarPool pool2;
    TemplateMap anti2 = fix_templates(ts, 1, "newanti", false, pool2);
    TemplateMap pf2 = fix_templates(ts, 1, "oldpf", false, pool2);
    auto expected = collect_antipf_constraints(ts, trivial_inv(ts), anti2);
    auto pf_cs = collect_pf_constraints(ts, trivial_inv(ts), pf2);
    expected.insert(expected.end(), pf_cs.begin(), pf_cs.end());

    // both pools interned the same names in the same order, so indices align
    REQUIRE(refute.size() == expected.size() + 1);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(refute[i].tag == expected[i].tag);
        CHECK(refute[i].premises == expected[i].premises);
        REQUIRE(refute[i].conclusion.size() == expected[i].conclusion.size());
        auto a = refute[i].conclusion.begin();
        auto b = expected[i].conclusion.begin();
        for (; a != refute[i].conclusion.end(); ++a, ++b) {
            CHECK(a->first == b->first);
            CHECK(a->second.constant == b->second.constant);
            CHECK(a->second.coeffs == b->second.coeffs);
        }
    }
}
