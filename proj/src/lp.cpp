// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/lp.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace diffcost {

std::string to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Timeout: return "timeout";
    case SolveStatus::Rejected: return "rejected";
    }
    return "?";
}

std::string to_string(AnalysisMode m) {
    switch (m) {
    case AnalysisMode::Diff: return "diff";
    case AnalysisMode::Verify: return "verify";
    case AnalysisMode::Refute: return "refute";
    case AnalysisMode::Single: return "single";
    }
    return "?";
}

namespace {

using Row = std::map<int, Rational>; // var -> coeff

struct Journal {
    int var;
    Row expr;          // var = expr_const + sum expr[u]*u
    Rational expr_const;
};

struct Presolved {
    bool infeasible = false;
    std::vector<std::pair<Row, Rational>> rows; // sum a*x = b over surviving vars
    std::vector<Journal> journal;               // reconstruction, reverse order
    Row objective;                              // over surviving vars
    Rational objective_const;
    std::vector<int> vars;                      // surviving var ids, sorted
    bool unbounded = false;
};

// Substitutes var := expr into a row in place.
void subst_row(Row& row, Rational& rhs, int var, const Row& expr, const Rational& expr_const) {
    auto it = row.find(var);
    if (it == row.end())
        return;
    Rational a = it->second;
    row.erase(it);
    rhs -= a * expr_const; // move constant to rhs: sum += a*const  => b -= a*const
    for (auto& [u, c] : expr) {
        Rational& slot = row[u];
        slot += a * c;
        if (slot.is_zero())
            row.erase(u);
    }
}

Presolved presolve(const LinearSystem& sys, int total_vars,
                   const std::vector<bool>& nonneg) {
    Presolved P;

    // rows: sum coeff*x = -const
    for (auto& e : sys.equalities) {
        Row r;
        for (auto& [v, c] : e.combo.coeffs)
            r[v] = c;
        P.rows.push_back({std::move(r), -e.combo.constant});
    }
    if (sys.objective) {
        for (auto& [v, c] : sys.objective->coeffs)
            P.objective[v] = sys.maximize ? -c : c;
        P.objective_const = sys.objective->constant;
    }

    std::vector<char> fixed(total_vars, 0);
    auto fix_var = [&](int v, const Rational& val) -> bool {
        if (nonneg[v] && val.sign() < 0)
            return false;
        for (auto& [row, rhs] : P.rows) {
            auto it = row.find(v);
            if (it == row.end())
                continue;
            rhs -= it->second * val;
            row.erase(it);
        }
        auto it = P.objective.find(v);
        if (it != P.objective.end()) {
            P.objective_const += it->second * val;
            P.objective.erase(it);
        }
        P.journal.push_back({v, {}, val});
        fixed[v] = 1;
        return true;
    };

    bool changed = true;
    while (changed) {
        changed = false;

        // empty and singleton rows, sign-forced rows
        for (std::size_t i = 0; i < P.rows.size();) {
            auto& [row, rhs] = P.rows[i];
            if (row.empty()) {
                if (!rhs.is_zero()) {
                    P.infeasible = true;
                    return P;
                }
                P.rows.erase(P.rows.begin() + i);
                changed = true;
                continue;
            }
            if (row.size() == 1) {
                int v = row.begin()->first;
                Rational val = rhs / row.begin()->second;
                if (!fix_var(v, val)) {
                    P.infeasible = true;
                    return P;
                }
                P.rows.erase(P.rows.begin() + i);
                changed = true;
                continue;
            }
            // all-nonneg same-sign row
            bool all_nonneg = true, all_pos = true, all_neg = true;
            for (auto& [v, c] : row) {
                if (!nonneg[v])
                    all_nonneg = false;
                if (c.sign() <= 0)
                    all_pos = false;
                if (c.sign() >= 0)
                    all_neg = false;
            }
            if (all_nonneg && (all_pos || all_neg)) {
                int dir = all_pos ? 1 : -1;
                if ((dir > 0 && rhs.sign() < 0) || (dir < 0 && rhs.sign() > 0)) {
                    P.infeasible = true;
                    return P;
                }
                if (rhs.is_zero()) {
                    std::vector<int> vs;
                    for (auto& [v, c] : row)
                        vs.push_back(v);
                    for (int v : vs)
                        fix_var(v, Rational(0));
                    P.rows.erase(P.rows.begin() + i);
                    changed = true;
                    continue;
                }
            }
            ++i;
        }

        // one free-variable elimination per sweep (shortest row, lowest ids)
        int best_row = -1, best_var = -1;
        std::size_t best_len = 0;
        for (std::size_t i = 0; i < P.rows.size(); ++i) {
            for (auto& [v, c] : P.rows[i].first) {
                if (nonneg[v])
                    continue;
                if (best_row < 0 || P.rows[i].first.size() < best_len ||
                    (P.rows[i].first.size() == best_len && v < best_var)) {
                    best_row = static_cast<int>(i);
                    best_var = v;
                    best_len = P.rows[i].first.size();
                }
                break; // first free var in this row is enough as candidate
            }
        }
        if (best_row >= 0) {
            auto [row, rhs] = P.rows[best_row];
            P.rows.erase(P.rows.begin() + best_row);
            Rational a = row.at(best_var);
            row.erase(best_var);
            // best_var = (rhs - sum row*u)/a
            Row expr;
            for (auto& [u, c] : row)
                expr[u] = -c / a;
            Rational expr_const = rhs / a;
            for (auto& [r2, rhs2] : P.rows)
                subst_row(r2, rhs2, best_var, expr, expr_const);
            {
                auto it = P.objective.find(best_var);
                if (it != P.objective.end()) {
                    Rational c = it->second;
                    P.objective.erase(it);
                    P.objective_const += c * expr_const;
                    for (auto& [u, k] : expr) {
                        Rational& slot = P.objective[u];
                        slot += c * k;
                        if (slot.is_zero())
                            P.objective.erase(u);
                    }
                }
            }
            P.journal.push_back({best_var, std::move(expr), expr_const});
            fixed[best_var] = 1;
            changed = true;
        }
    }

    // Free variables that survive touch no equality. A nonzero objective
    // coefficient lets the objective diverge; otherwise pin them to zero.
    for (int v = 0; v < total_vars; ++v) {
        if (fixed[v] || nonneg[v])
            continue;
        auto it = P.objective.find(v);
        bool in_obj = it != P.objective.end();
        bool in_rows = false;
        for (auto& [row, rhs] : P.rows)
            if (row.count(v)) {
                in_rows = true;
                break;
            }
        if (in_rows)
            continue; // will be handled in a later sweep; should not happen
        if (in_obj) {
            P.unbounded = true;
            return P;
        }
    }

    std::set<int> var_set;
    for (auto& [row, rhs] : P.rows)
        for (auto& [v, c] : row)
            var_set.insert(v);
    for (auto& [v, c] : P.objective)
        var_set.insert(v);
    P.vars.assign(var_set.begin(), var_set.end());
    return P;
}

struct Tableau {
    // rows 0..m-1: constraints; row m: cost. Column layout: structural cols
    // then rhs at index n.
    int m = 0, n = 0;
    std::vector<std::vector<Rational>> t;
    std::vector<int> basis; // size m, column index of the basic var per row
    long pivots = 0;
    long pivot_cap = 1000000;
    bool bland = false;
    int stall = 0;

    Rational& at(int i, int j) { return t[i][j]; }

    bool pivot(int pr, int pc) {
        if (++pivots > pivot_cap)
            return false;
        Rational inv = Rational(1) / t[pr][pc];
        for (auto& x : t[pr])
            x *= inv;
        // pivot rows are sparse in these systems: walk their support once
        std::vector<int> support;
        support.reserve(32);
        for (int j = 0; j <= n; ++j)
            if (!t[pr][j].is_zero())
                support.push_back(j);
        for (int i = 0; i <= m; ++i) {
            if (i == pr)
                continue;
            Rational f = t[i][pc];
            if (f.is_zero())
                continue;
            for (int j : support)
                t[i][j] -= f * t[pr][j];
        }
        basis[pr] = pc;
        return true;
    }

    // Minimizes the cost row. Returns Optimal/Unbounded/Timeout.
    SolveStatus iterate(const std::vector<bool>& allowed) {
        for (;;) {
            int enter = -1;
            if (!bland) {
                Rational best(0);
                for (int j = 0; j < n; ++j) {
                    if (!allowed[j])
                        continue;
                    if (t[m][j] < best) {
                        best = t[m][j];
                        enter = j;
                    }
                }
            } else {
                for (int j = 0; j < n; ++j) {
                    if (!allowed[j])
                        continue;
                    if (t[m][j].sign() < 0) {
                        enter = j;
                        break;
                    }
                }
            }
            if (enter < 0)
                return SolveStatus::Optimal;

            int leave = -1;
            Rational best_ratio(0);
            for (int i = 0; i < m; ++i) {
                if (t[i][enter].sign() <= 0)
                    continue;
                Rational ratio = t[i][n] / t[i][enter];
                if (leave < 0 || ratio < best_ratio ||
                    (ratio == best_ratio && basis[i] < basis[leave]))
                {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave < 0)
                return SolveStatus::Unbounded;

            Rational before = t[m][n];
            if (!pivot(leave, enter))
                return SolveStatus::Timeout;
            if (t[m][n] == before) {
                if (++stall > 100)
                    bland = true; // permanent switch, guarantees termination
            } else {
                stall = 0;
            }
        }
    }
};

} // namespace

Solution solve(const LinearSystem& sys, const VarPool& pool, const SolverOptions& opt) {
    Solution sol;

    // Extend the variable space with slacks for general inequalities.
    int total = static_cast<int>(pool.size());
    std::vector<bool> nonneg(total, false);
    for (int v = 0; v < total; ++v)
        nonneg[v] = pool.nonneg(v);
    LinearSystem work = sys;
    int next_var = total;
    for (auto& iq : sys.inequalities) {
        // combo >= 0  ->  combo - s = 0, s >= 0
        LinearCombo eq = iq;
        int s = next_var++;
        nonneg.push_back(true);
        eq.add(s, Rational(-1));
        work.equalities.push_back({std::move(eq), "slack"});
    }
    total = next_var;

    Presolved P = presolve(work, total, nonneg);
    if (P.infeasible) {
        sol.status = SolveStatus::Infeasible;
        return sol;
    }
    if (P.unbounded) {
        sol.status = SolveStatus::Unbounded;
        return sol;
    }

    std::map<int, Rational> values; // surviving vars

    if (!P.rows.empty() || !P.vars.empty()) {
        // column compaction
        std::map<int, int> col_of;
        for (std::size_t j = 0; j < P.vars.size(); ++j)
            col_of[P.vars[j]] = static_cast<int>(j);
        int n = static_cast<int>(P.vars.size());
        int m = static_cast<int>(P.rows.size());

        Tableau tab;
        tab.pivot_cap = opt.pivot_cap;
        tab.m = m;
        tab.n = n + m; // artificials appended
        tab.t.assign(m + 1, std::vector<Rational>(tab.n + 1, Rational(0)));
        tab.basis.assign(m, 0);

        for (int i = 0; i < m; ++i) {
            auto& [row, rhs] = P.rows[i];
            int flip = rhs.sign() < 0 ? -1 : 1;
            for (auto& [v, c] : row)
                tab.at(i, col_of[v]) = c * Rational(flip);
            tab.at(i, tab.n) = rhs * Rational(flip);
            tab.at(i, n + i) = Rational(1); // artificial
            tab.basis[i] = n + i;
        }
        // Phase 1 cost row: minimize sum of artificials; reduced costs start
        // as -(sum of constraint rows) on structural columns.
        for (int j = 0; j <= tab.n; ++j) {
            Rational s(0);
            for (int i = 0; i < m; ++i)
                s += tab.at(i, j);
            if (j < n || j == tab.n)
                tab.at(m, j) = -s;
            else
                tab.at(m, j) = Rational(0);
        }
        std::vector<bool> allowed(tab.n, true);
        SolveStatus st = tab.iterate(allowed);
        if (st == SolveStatus::Timeout) {
            sol.status = st;
            sol.pivots = tab.pivots;
            return sol;
        }
        if (st == SolveStatus::Unbounded)
            throw SemanticError("internal: phase 1 unbounded");
        if (tab.at(m, tab.n).sign() != 0) {
            // leftover artificial value: minimum of sum of artificials > 0
            sol.status = SolveStatus::Infeasible;
            sol.pivots = tab.pivots;
            return sol;
        }
        // Drive artificials out of the basis or drop redundant rows.
        std::vector<int> drop_rows;
        for (int i = 0; i < m; ++i) {
            if (tab.basis[i] < n)
                continue;
            int pc = -1;
            for (int j = 0; j < n; ++j)
                if (!tab.at(i, j).is_zero()) {
                    pc = j;
                    break;
                }
            if (pc >= 0) {
                if (!tab.pivot(i, pc)) {
                    sol.status = SolveStatus::Timeout;
                    sol.pivots = tab.pivots;
                    return sol;
                }
            } else {
                drop_rows.push_back(i);
            }
        }
        // artificial columns are no longer enterable
        for (int j = n; j < tab.n; ++j)
            allowed[j] = false;

        bool feasibility_only = !sys.objective.has_value();
        if (!feasibility_only) {
            // Phase 2 cost row from the presolved objective.
            for (int j = 0; j <= tab.n; ++j)
                tab.at(m, j) = Rational(0);
            for (auto& [v, c] : P.objective)
                tab.at(m, col_of[v]) = c;
            // eliminate basic columns from the cost row
            for (int i = 0; i < m; ++i) {
                if (std::find(drop_rows.begin(), drop_rows.end(), i) != drop_rows.end())
                    continue;
                Rational f = tab.at(m, tab.basis[i]);
                if (f.is_zero())
                    continue;
                for (int j = 0; j <= tab.n; ++j) {
                    if (tab.at(i, j).is_zero())
                        continue;
                    tab.at(m, j) -= f * tab.at(i, j);
                }
            }
            tab.bland = false;
            tab.stall = 0;
            st = tab.iterate(allowed);
            if (st == SolveStatus::Timeout || st == SolveStatus::Unbounded) {
                sol.status = st;
                sol.pivots = tab.pivots;
                return sol;
            }
        }

        for (int i = 0; i < m; ++i) {
            if (tab.basis[i] < n)
                values[P.vars[tab.basis[i]]] = tab.at(i, tab.n);
        }
        for (int v : P.vars)
            values.emplace(v, Rational(0));
        // dual feasibility at the final basis: no negative reduced cost left
        sol.dual_ok = true;
        for (int j = 0; j < tab.n; ++j)
            if (allowed[j] && tab.at(m, j).sign() < 0)
                sol.dual_ok = false;
        sol.pivots = tab.pivots;
        sol.status = sys.objective ? SolveStatus::Optimal : SolveStatus::Feasible;
    } else {
        sol.status = sys.objective ? SolveStatus::Optimal : SolveStatus::Feasible;
    }

    // Anything not pinned by the tableau defaults to zero (including
    // variables whose rows were removed entirely), then reconstruct the
    // eliminated variables in reverse order.
    for (int v = 0; v < total; ++v)
        values.emplace(v, Rational(0));
    for (auto it = P.journal.rbegin(); it != P.journal.rend(); ++it) {
        Rational v = it->expr_const;
        for (auto& [u, c] : it->expr)
            v += c * values.at(u);
        values[it->var] = v;
    }

    // Strip internal slack variables from the reported assignment.
    for (auto it = values.begin(); it != values.end();) {
        if (it->first >= static_cast<int>(pool.size()))
            it = values.erase(it);
        else
            ++it;
    }
    sol.assignment = std::move(values);

    if (sys.objective)
        sol.objective_value = sys.objective->eval(sol.assignment);

    std::string why;
    if (!verify_solution(sys, pool, sol.assignment, Rational(0), &why))
        throw SemanticError("internal: solver produced an invalid point: " + why);
    return sol;
}

bool verify_solution(const LinearSystem& sys, const VarPool& pool,
                     const std::map<int, Rational>& assignment, const Rational& tol,
                     std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why)
            *why = msg;
        return false;
    };
    for (auto& e : sys.equalities) {
        Rational r = e.combo.eval(assignment);
        if (r > tol || r < -tol)
            return fail("equality " + e.tag + " residual " + r.str());
    }
    for (auto& iq : sys.inequalities) {
        Rational r = iq.eval(assignment);
        if (r < -tol)
            return fail("inequality violated by " + r.str());
    }
    for (int v : sys.nonneg_vars) {
        auto it = assignment.find(v);
        Rational val = it == assignment.end() ? Rational(0) : it->second;
        if (val < -tol)
            return fail("multiplier " + pool.name(v) + " negative: " + val.str());
    }
    for (auto& [v, val] : assignment) {
        if (pool.nonneg(v) && val < -tol)
            return fail("variable " + pool.name(v) + " negative: " + val.str());
    }
    return true;
}

namespace {

Rational parse_external_value(const std::string& s) {
    // accepts fractions, decimals and exponent notation
    auto epos = s.find_first_of("eE");
    if (epos == std::string::npos)
        return Rational::parse(s);
    Rational mant = Rational::parse(s.substr(0, epos));
    long exp = std::stol(s.substr(epos + 1));
    Rational scale(1);
    Rational ten(10);
    for (long i = 0; i < std::labs(exp); ++i)
        scale *= ten;
    return exp >= 0 ? mant * scale : mant / scale;
}

} // namespace

Solution solver_backend(const LinearSystem& sys, const VarPool& pool,
                        const std::string& backend, const SolverOptions& opt) {
    if (backend.empty() || backend == "exact" || backend == "exact-simplex")
        return solve(sys, pool, opt);
    if (backend.rfind("external:", 0) != 0)
        throw SemanticError("unknown solver backend '" + backend + "'");
    std::string cmd = backend.substr(9);

    char path[] = "/tmp/diffcost-lp-XXXXXX";
    int fd = mkstemp(path);
    if (fd < 0)
        throw SemanticError("cannot create temporary LP file");
    {
        std::ofstream out(path);
        out << emit_lp(sys, pool);
    }
    close(fd);

    std::string full = cmd + " " + path + " 2>/dev/null";
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(full.c_str(), "r"), pclose);
    if (!pipe)
        throw SemanticError("cannot run external solver '" + cmd + "'");
    std::string output;
    char buf[4096];
    while (fgets(buf, sizeof buf, pipe.get()))
        output += buf;
    pipe.reset();
    std::remove(path);

    Solution sol;
    std::istringstream in(output);
    std::string word;
    std::map<int, Rational> assignment;
    std::string status = "unknown";
    std::optional<Rational> objective;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string a, b;
        if (!(ls >> a >> b))
            continue;
        if (a == "status") {
            status = b;
        } else if (a == "objective") {
            objective = parse_external_value(b);
        } else {
            // variable line: name value
            for (int v = 0; v < static_cast<int>(pool.size()); ++v) {
                if (pool.name(v) == a) {
                    assignment[v] = parse_external_value(b);
                    break;
                }
            }
        }
    }
    if (status == "infeasible") {
        sol.status = SolveStatus::Infeasible;
        return sol;
    }
    if (status == "unbounded") {
        sol.status = SolveStatus::Unbounded;
        return sol;
    }
    if (status != "optimal" && status != "feasible") {
        sol.status = SolveStatus::Rejected;
        return sol;
    }
    Rational tol(1, 1000000);
    std::string why;
    if (!verify_solution(sys, pool, assignment, tol, &why)) {
        sol.status = SolveStatus::Rejected;
        return sol;
    }
    sol.status = status == "optimal" ? SolveStatus::Optimal : SolveStatus::Feasible;
    sol.assignment = std::move(assignment);
    if (sys.objective)
        sol.objective_value = sys.objective->eval(sol.assignment);
    else if (objective)
        sol.objective_value = objective;
    return sol;
}

Witness extract_witness(const Solution& sol, AnalysisMode mode, const TemplateMap& upper,
                        const TemplateMap& lower, int threshold_var) {
    if (sol.status != SolveStatus::Optimal && sol.status != SolveStatus::Feasible)
        throw SemanticError("no witness: solver status is " + to_string(sol.status));
    Witness w;
    w.mode = mode;
    if (threshold_var >= 0) {
        auto it = sol.assignment.find(threshold_var);
        w.threshold_raw = it == sol.assignment.end() ? Rational(0) : it->second;
        w.threshold_int = w.threshold_raw.floor();
    }
    for (auto& [loc, slot] : upper.at)
        w.upper[loc] = upper.instantiate(loc, sol.assignment);
    for (auto& [loc, slot] : lower.at)
        w.lower[loc] = lower.instantiate(loc, sol.assignment);
    w.upper_system = upper.tag;
    w.lower_system = lower.tag;
    return w;
}

} // namespace diffcost
