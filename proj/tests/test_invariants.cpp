// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/invariants.hpp"
#include "diffcost/parse.hpp"

#include <doctest.h>

#include <algorithm>
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

bool has_conjunct(const Assertion& a, const Polynomial& p) {
    return std::any_of(a.conjuncts.begin(), a.conjuncts.end(),
                       [&](const AffineExpr& e) { return e.poly() == p; });
}

} // namespace

TEST_CASE("interval propagation bounds a counter loop") {
    const char* text = R"(
void f(int n) {
  assume(1 <= n && n <= 100);
  int x = 0;
  while (x < n) { x = x + 1; cost = cost + 1; }
}
)";
    TransitionSystem ts = parse_program(text);
    InvariantMap inv = propagate_intervals(ts);
    const Assertion& head = inv.of("l1");
    Polynomial x = Polynomial::var("x"), n = Polynomial::var("n");
    CHECK(has_conjunct(head, x));                     // 0 <= x
    CHECK(has_conjunct(head, Polynomial(100) - x));   // x <= 100 via x <= n - 1 + 1
    CHECK(has_conjunct(head, n - Polynomial(1)));     // theta0 pass-through
    CHECK(has_conjunct(head, Polynomial(100) - n));

    // containment check against brute-force reachability for n <= 5
    RunBudget b = derive_budget(ts, 5);
    auto rep = check_invariant_sampled(ts, inv, 100000, b);
    CHECK(rep.ok);
    CHECK(rep.states_checked > 0);
}

TEST_CASE("straight-line system gets the interval image of theta0") {
    const char* text = R"(
void f(int a) {
  assume(2 <= a && a <= 7);
  int b = a + 1;
  cost = cost + 1;
}
)";
    TransitionSystem ts = parse_program(text);
    InvariantMap inv = propagate_intervals(ts);
    const Assertion& out = inv.of(ts.terminal);
    Polynomial b = Polynomial::var("b");
    CHECK(has_conjunct(out, b - Polynomial(3)));
    CHECK(has_conjunct(out, Polynomial(8) - b));
}

TEST_CASE("unbounded nondet produces no conjunct for the written variable") {
    const char* text = R"(
void f(int n) {
  assume(1 <= n && n <= 4);
  int y = 0;
  y = nondet();
  cost = cost + 1;
}
)";
    TransitionSystem ts = parse_program(text);
    InvariantMap inv = propagate_intervals(ts);
    for (auto& c : inv.of(ts.terminal).conjuncts)
        CHECK(!c.poly().variables().count("y"));
}

TEST_CASE("merge keeps both sides and deduplicates") {
    InvariantMap a, b;
    a.at["l1"] = Assertion{{AffineExpr(Polynomial::var("x"))}};
    b.at["l1"] = Assertion{
        {AffineExpr(Polynomial::var("n") - Polynomial::var("x")), AffineExpr(Polynomial::var("x"))}};
    InvariantMap m = merge_annotations(a, b);
    CHECK(m.at["l1"].conjuncts.size() == 2);

    InvariantMap empty;
    empty.at["l1"] = Assertion{};
    InvariantMap m2 = merge_annotations(a, empty);
    CHECK(m2.at["l1"].conjuncts.size() == 1);

    InvariantMap mismatched;
    mismatched.at["l9"] = Assertion{};
    CHECK_THROWS_AS(merge_annotations(a, mismatched), SemanticError);
}

TEST_CASE("golden join system passes its propagated invariants") {
    TransitionSystem ts = parse_file(bench("join_old.ts"));
    InvariantMap inv = propagate_intervals(ts);
    RunBudget b = derive_budget(ts, 4);
    auto rep = check_invariant_sampled(ts, inv, 10000, b);
    CHECK(rep.ok);
}

TEST_CASE("user annotation files verify on the join pair") {
    std::string invtext = slurp(bench("join.inv"));
    for (auto& [path, tag] : std::vector<std::pair<std::string, std::string>>{
             {"join_new.imp", "new"}, {"join_old.imp", "old"}}) {
        TransitionSystem ts = parse_file(bench(path));
        InvariantMap merged = merge_annotations(
            propagate_intervals(ts), complete_invariants(ts, parse_invariant_file(invtext, tag)));
        RunBudget b = derive_budget(ts, 4);
        auto rep = check_invariant_sampled(ts, merged, 20000, b);
        CHECK(rep.ok);
    }
}

TEST_CASE("planted wrong conjunct is reported with a witness state") {
    const char* text = R"(
void f(int n) {
  assume(1 <= n && n <= 5);
  int x = 0;
  while (x < n) { x = x + 1; cost = cost + 1; }
}
)";
    TransitionSystem ts = parse_program(text);
    InvariantMap wrong = propagate_intervals(ts);
    wrong.at["l1"].conjuncts.push_back(AffineExpr(Polynomial(1) - Polynomial::var("x")));
    RunBudget b = derive_budget(ts, 5);
    auto rep = check_invariant_sampled(ts, wrong, 100000, b);
    CHECK(!rep.ok);
    REQUIRE(rep.violation.has_value());
    CHECK(rep.violation->location == "l1");
    CHECK(rep.violation->state.at("x") > 1);
}

TEST_CASE("trivial invariant passes vacuously") {
    TransitionSystem ts = parse_file(bench("join_old.ts"));
    InvariantMap trivial;
    for (auto& l : ts.locations)
        trivial.at[l] = Assertion{};
    RunBudget b = derive_budget(ts, 3);
    CHECK(check_invariant_sampled(ts, trivial, 5000, b).ok);
}

TEST_CASE("propagation is deterministic") {
    TransitionSystem ts = parse_file(bench("join_old.ts"));
    InvariantMap a = propagate_intervals(ts);
    InvariantMap b = propagate_intervals(ts);
    REQUIRE(a.at.size() == b.at.size());
    for (auto& [loc, assertion] : a.at)
        CHECK(assertion.str() == b.at.at(loc).str());
}

TEST_CASE("zero state budget is rejected") {
    TransitionSystem ts = parse_file(bench("join_old.ts"));
    InvariantMap inv = propagate_intervals(ts);
    RunBudget b = derive_budget(ts, 2);
    CHECK_THROWS_AS(check_invariant_sampled(ts, inv, 0, b), SemanticError);
}

TEST_CASE("every bundled annotation file survives sampled validation") {
    // replay each suite entry's invariants against enumerated reachable
    // states on its oracle box; a violation means a wrong annotation shipped
    auto suite = std::string(DIFFCOST_SOURCE_DIR) + "/benchmarks/";
    struct Entry {
        const char* file;
        const char* inv;
        const char* tag;
        std::map<std::string, std::pair<std::int64_t, std::int64_t>> box;
    };
    std::vector<Entry> entries = {
        {"join_new.imp", "join.inv", "new", {}},
        {"join_old.imp", "join.inv", "old", {}},
        {"simple_single_new.imp", "simple_single.inv", "new", {}},
        {"simple_single_old.imp", "simple_single.inv", "old", {}},
        {"nested_single_new.imp", "nested_single.inv", "new", {}},
        {"nested_single_old.imp", "nested_single.inv", "old", {}},
        {"sequential_single_new.imp", "sequential_single.inv", "new", {}},
        {"sequential_single_old.imp", "sequential_single.inv", "old", {}},
        {"simple_multiple_new.imp", "simple_multiple.inv", "new", {}},
        {"simple_multiple_old.imp", "simple_multiple.inv", "old", {}},
        {"dis1_new.imp", "dis1.inv", "new",
         {{"x0", {0, 1}}, {"y0", {0, 1}}, {"n", {1, 3}}, {"m", {1, 3}}}},
        {"dis1_old.imp", "dis1.inv", "old",
         {{"x0", {0, 1}}, {"y0", {0, 1}}, {"n", {1, 3}}, {"m", {1, 3}}}},
        {"nested_multiple_dep_new.imp", "nested_multiple_dep.inv", "new", {}},
        {"nested_multiple_dep_old.imp", "nested_multiple_dep.inv", "old", {}},
        {"nested_bench_new.imp", "nested_bench.inv", "new", {}},
        {"sum_new.imp", "sum.inv", "new", {}},
        {"sum_old.imp", "sum.inv", "old", {}},
        {"simple_multiple_dep_new.imp", "simple_multiple_dep.inv", "new", {}},
        {"simple_multiple_dep_old.imp", "simple_multiple_dep.inv", "old", {}},
        {"simple_single2_new.imp", "simple_single2.inv", "new", {}},
        {"simple_single2_old.imp", "simple_single2.inv", "old", {}},
        {"exact_cost_loop.imp", "exact_cost_loop.inv", "", {}},
        {"nondet_gap_loop.imp", "nondet_gap_loop.inv", "", {}},
    };
    for (auto& e : entries) {
        INFO(e.file);
        TransitionSystem ts = parse_file(suite + e.file);
        InvariantMap merged = merge_annotations(
            propagate_intervals(ts),
            complete_invariants(ts, parse_invariant_file(slurp(suite + e.inv), e.tag)));
        RunBudget b = derive_budget(ts, 4);
        for (auto& [v, r] : e.box)
            b.input_box[v] = r;
        auto rep = check_invariant_sampled(ts, merged, 30000, b);
        if (!rep.ok) {
            INFO("violated: " << rep.violation->conjunct << " at " << rep.violation->location);
        }
        CHECK(rep.ok);
        CHECK(rep.states_checked > 0);
    }
}
