// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/oracle.hpp"
#include "diffcost/parse.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace diffcost;

namespace {

std::string bench(const std::string& name) {
    return std::string(DIFFCOST_SOURCE_DIR) + "/benchmarks/" + name;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("golden transition system parses with the documented shape") {
    TransitionSystem ts = parse_transition_system(slurp(bench("join_old.ts")));
    CHECK(ts.locations.size() == 5);
    CHECK(ts.transitions.size() == 7);
    CHECK(ts.initial == "l0");
    CHECK(ts.terminal == "lout");
    CHECK(ts.variables ==
          std::vector<std::string>{"lenA", "lenB", "i", "j", "cost"});
    CHECK_NOTHROW(ts.validate());
}

TEST_CASE("ts print/parse round trip is the identity on the model") {
    TransitionSystem ts = parse_transition_system(slurp(bench("join_old.ts")));
    TransitionSystem again = parse_transition_system(print_ts(ts));
    CHECK(ts.same_structure(again));
}

TEST_CASE("location without outgoing transitions is a semantic error") {
    const char* text = R"(
vars x cost;
init a;
terminal lout;
theta0 x >= 0, cost >= 0, -cost >= 0;
trans a -> b;
trans b -> lout;
trans lout -> lout;
)";
    CHECK_NOTHROW(parse_transition_system(text));
    const char* broken = R"(
vars x cost;
init a;
terminal lout;
theta0 x >= 0, cost >= 0, -cost >= 0;
trans a -> b guard x >= 1;
trans lout -> lout;
)";
    CHECK_THROWS_AS(parse_transition_system(broken), SemanticError);
}

TEST_CASE("empty transition list with init = terminal is a one-location system") {
    const char* text = R"(
vars cost;
init lout;
terminal lout;
theta0 cost >= 0, -cost >= 0;
)";
    TransitionSystem ts = parse_transition_system(text);
    CHECK(ts.locations.size() == 1);
    CHECK(ts.transitions.size() == 1);
    CHECK(ts.transitions[0].update.is_identity());
}

TEST_CASE("theta0 must pin cost to zero") {
    const char* text = R"(
vars x cost;
init lout;
terminal lout;
theta0 x >= 0, cost >= 0;
)";
    CHECK_THROWS_AS(parse_transition_system(text), SemanticError);
}

TEST_CASE("imp: simple loop lowers to three locations") {
    const char* text = R"(
void f(int x, int n) {
  assume(1 <= n && n <= 100);
  while (x < n) { x = x + 1; cost = cost + 1; }
}
)";
    TransitionSystem ts = parse_program(text);
    CHECK(ts.locations.size() == 3);
    CHECK(ts.initial == "l0");
    // l0 -> l1 (guard), l1 -> l0 (body), l0 -> lout (exit), lout self-loop
    CHECK(ts.transitions.size() == 4);
}

TEST_CASE("imp: join source lowers isomorphic to the golden ts file") {
    TransitionSystem imp = parse_file(bench("join_old.imp"));
    TransitionSystem golden = parse_file(bench("join_old.ts"));
    CHECK(imp.same_structure(golden));
}

TEST_CASE("imp print/parse round trip through the ts format") {
    TransitionSystem imp = parse_file(bench("join_new.imp"));
    TransitionSystem again = parse_transition_system(print_ts(imp));
    CHECK(imp.same_structure(again));
}

TEST_CASE("imp: never-assigned variable becomes a nondet source before its guard") {
    const char* text = R"(
void f(int n) {
  assume(1 <= n && n <= 3);
  int x = 0;
  int nondetvar;
  while (x < n) {
    while (x < n && nondetvar >= 0) { x = x + 1; cost = cost + 1; }
    x = x + 1;
    cost = cost + 1;
  }
}
)";
    TransitionSystem ts = parse_program(text);
    // some transition entering the inner head refreshes nondetvar
    bool found = false;
    std::string inner_head;
    for (auto& t : ts.transitions)
        for (auto& g : t.guard.conjuncts)
            if (g.poly().variables().count("nondetvar"))
                inner_head = t.source;
    REQUIRE(!inner_head.empty());
    for (auto& t : ts.transitions) {
        if (t.target != inner_head)
            continue;
        auto it = t.update.entries().find("nondetvar");
        REQUIRE(it != t.update.entries().end());
        CHECK(std::holds_alternative<NondetUpdate>(it->second));
        found = true;
    }
    CHECK(found);

    // oracle validation at small bounds: with n=2 the extremes are (2, 3):
    // every increment costs 1; the final outer step can overshoot to x=n+1.
    RunBudget b = derive_budget(ts, 1);
    b.input_box["n"] = {2, 2};
    CostExtremes ce = cost_extremes(ts, initial_points(ts, b).at(0), b);
    CHECK(ce.inf == 2);
    CHECK(ce.sup == 3);
}

TEST_CASE("imp rejects unsupported constructs") {
    CHECK_THROWS(parse_program("void f(int a) { assume(a >= 0); a[0] = 1; }"));
    CHECK_THROWS(parse_program("void f(int a) { int cost = 0; }"));
    CHECK_THROWS(parse_program("void f(int a) { g(a); }"));
    CHECK_THROWS(parse_program("void f(int a) { return; }"));
    // polynomial guard must be rejected, assignments may be polynomial
    CHECK_THROWS(parse_program("void f(int a) { while (a * a < 10) { a = a + 1; } }"));
    CHECK_NOTHROW(parse_program("void f(int a) { a = a * a; cost = cost + 1; }"));
}

TEST_CASE("imp: disjunctive guard splits transitions; negation is conjunctive") {
    const char* text = R"(
void f(int i, int n) {
  assume(1 <= n && n <= 10);
  while (i < n || i > n) {
    i = i + 1;
    cost = cost + 1;
  }
}
)";
    TransitionSystem ts = parse_program(text);
    // two guarded entries into the body, one conjunctive exit (i = n)
    int body_edges = 0, exit_edges = 0;
    for (auto& t : ts.transitions) {
        if (t.source == ts.initial && t.target != ts.terminal && !t.guard.is_true())
            ++body_edges;
        if (t.target == ts.terminal && t.source == ts.initial)
            ++exit_edges;
    }
    CHECK(body_edges == 2);
    CHECK(exit_edges == 1);
    for (auto& t : ts.transitions)
        if (t.target == ts.terminal && t.source == ts.initial)
            CHECK(t.guard.conjuncts.size() == 2);
}

TEST_CASE("polynomial expression parser") {
    CHECK(parse_polynomial("lenA * lenB") ==
          Polynomial::var("lenA") * Polynomial::var("lenB"));
    CHECK(parse_polynomial("2*x^2 - 3") ==
          Polynomial(2) * Polynomial::var("x") * Polynomial::var("x") - Polynomial(3));
    CHECK(parse_polynomial("-(x + 1)") == -(Polynomial::var("x") + Polynomial(1)));
    CHECK_THROWS_AS(parse_polynomial("x +"), ParseError);
}

TEST_CASE("imp: assignment reading a same-block nondet value splits the transition") {
    const char* text = R"(
void f() {
  int y = 0;
  int x = 0;
  y = nondet(0, 2);
  x = y + 1;
  cost = cost + x;
}
)";
    TransitionSystem ts = parse_program(text);
    // the nondet choice must be materialized at a location before x reads it:
    // no transition may both choose y nondeterministically and assign x a
    // polynomial mentioning y
    bool composed_in_one = false;
    for (auto& t : ts.transitions) {
        auto y = t.update.entries().find("y");
        auto x = t.update.entries().find("x");
        if (y == t.update.entries().end() || x == t.update.entries().end())
            continue;
        if (std::holds_alternative<NondetUpdate>(y->second) &&
            std::holds_alternative<Polynomial>(x->second) &&
            std::get<Polynomial>(x->second).variables().count("y"))
            composed_in_one = true;
    }
    CHECK(!composed_in_one);

    // oracle semantics: cost = y + 1 for the chosen y in [0,2]
    RunBudget b = derive_budget(ts, 1);
    CostExtremes ce = cost_extremes(ts, initial_points(ts, b).at(0), b);
    CHECK(ce.inf == 1);
    CHECK(ce.sup == 3);
}

TEST_CASE("imp: nondet bounds read the pre-state of their own block") {
    const char* text = R"(
void f() {
  int x = 0;
  x = 5;
  int y = 0;
  y = nondet(0, x);
  cost = cost + y;
}
)";
    TransitionSystem ts = parse_program(text);
    RunBudget b = derive_budget(ts, 1);
    CostExtremes ce = cost_extremes(ts, initial_points(ts, b).at(0), b);
    CHECK(ce.inf == 0);
    CHECK(ce.sup == 5);
}

TEST_CASE("one-sided nondet bounds survive the print/parse round trip") {
    const char* text = R"(
vars x y cost;
init l;
terminal lout;
theta0 x >= 0, 3 - x >= 0, cost >= 0, -cost >= 0;
trans l -> l guard 3 - x >= 1 update x := x + 1, y := nondet >= 0, cost := cost + 1;
trans l -> lout guard x - 3 >= 0 update y := nondet <= x;
)";
    TransitionSystem ts = parse_transition_system(text);
    TransitionSystem again = parse_transition_system(print_ts(ts));
    CHECK(ts.same_structure(again));
}
