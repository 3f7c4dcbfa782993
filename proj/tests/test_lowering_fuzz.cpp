// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Differential check of the whole parse -> lower -> enumerate pipeline:
// random programs from a restricted deterministic family are emitted as
// source text and simultaneously simulated directly; the oracle's extremes
// must coincide with the simulated cost on every input.
#include "diffcost/oracle.hpp"
#include "diffcost/parse.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace diffcost;

namespace {

struct GenParams {
    int n_hi;          // assume(1 <= n && n <= n_hi)
    int m_hi;          // assume(1 <= m && m <= m_hi)
    int step;          // x increment
    int outer_cost;    // per outer iteration
    int branch_pivot;  // if (x < pivot) then_cost else else_cost
    int then_cost;
    int else_cost;
    bool with_branch;
    bool with_inner;   // for-loop over y < m
    int inner_cost;
    bool conj_guard;   // while (x < n && x < m) instead of (x < n)
    bool with_tail;    // tail loop while (x < n + 1)
    int tail_cost;
};

GenParams random_params(std::mt19937& rng) {
    auto pick = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };
    GenParams p;
    p.n_hi = pick(1, 4);
    p.m_hi = pick(1, 4);
    p.step = pick(1, 2);
    p.outer_cost = pick(-2, 3);
    p.branch_pivot = pick(0, 4);
    p.then_cost = pick(-1, 3);
    p.else_cost = pick(-1, 3);
    p.with_branch = pick(0, 1);
    p.with_inner = pick(0, 1);
    p.inner_cost = pick(0, 2);
    p.conj_guard = pick(0, 1);
    p.with_tail = pick(0, 1);
    p.tail_cost = pick(0, 2);
    return p;
}

std::string emit(const GenParams& p) {
    std::ostringstream os;
    os << "void f(int n, int m) {\n";
    os << "  assume(1 <= n && n <= " << p.n_hi << " && 1 <= m && m <= " << p.m_hi << ");\n";
    os << "  int x = 0;\n";
    if (p.conj_guard)
        os << "  while (x < n && x < m) {\n";
    else
        os << "  while (x < n) {\n";
    os << "    x = x + " << p.step << ";\n";
    os << "    cost = cost + " << p.outer_cost << ";\n";
    if (p.with_branch) {
        os << "    if (x < " << p.branch_pivot << ") { cost = cost + " << p.then_cost
           << "; }\n";
        os << "    else { cost = cost + " << p.else_cost << "; }\n";
    }
    if (p.with_inner) {
        os << "    for (int y = 0; y < m; y = y + 1) { cost = cost + " << p.inner_cost
           << "; }\n";
    }
    os << "  }\n";
    if (p.with_tail) {
        os << "  while (x < n + 1) { x = x + 1; cost = cost + " << p.tail_cost << "; }\n";
    }
    os << "}\n";
    return os.str();
}

// Reference semantics, written directly against the family definition.
std::int64_t simulate(const GenParams& p, std::int64_t n, std::int64_t m) {
    std::int64_t x = 0, cost = 0;
    while (p.conj_guard ? (x < n && x < m) : (x < n)) {
        x += p.step;
        cost += p.outer_cost;
        if (p.with_branch)
            cost += x < p.branch_pivot ? p.then_cost : p.else_cost;
        if (p.with_inner)
            for (std::int64_t y = 0; y < m; ++y)
                cost += p.inner_cost;
    }
    if (p.with_tail)
        while (x < n + 1) {
            x += 1;
            cost += p.tail_cost;
        }
    return cost;
}

} // namespace

TEST_CASE("lowered semantics agree with direct simulation on random programs") {
    for (int seed = 1; seed <= 60; ++seed) {
        std::mt19937 rng(seed);
        GenParams p = random_params(rng);
        std::string text = emit(p);
        INFO(text);
        TransitionSystem ts = parse_program(text);
        RunBudget b = derive_budget(ts, 8);
        auto points = initial_points(ts, b);
        REQUIRE(!points.empty());
        for (auto& x0 : points) {
            CostExtremes ce = cost_extremes(ts, x0, b);
            std::int64_t expect = simulate(p, x0.at("n"), x0.at("m"));
            CHECK(ce.inf == expect);
            CHECK(ce.sup == expect);
        }
    }
}
