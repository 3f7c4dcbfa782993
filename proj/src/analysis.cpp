// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/analysis.hpp"

#include "interval.hpp"

#include <json.hpp>

#include <chrono>
#include <fstream>
#include <sstream>

namespace diffcost {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void record_invariants(AnalysisReport& rep, const std::string& tag, const PreparedSystem& sys) {
    auto& slot = rep.invariants_assumed[tag.empty() ? sys.ts.name : tag];
    for (auto& [loc, a] : sys.inv.at)
        slot[loc] = a.str();
}

void record_params(AnalysisReport& rep, const AnalysisOptions& opt) {
    rep.parameters["degree"] = std::to_string(opt.degree);
    rep.parameters["prodk"] = std::to_string(opt.effective_k());
    rep.parameters["solver"] = opt.solver.empty() ? "exact" : opt.solver;
    rep.parameters["eps"] = opt.eps.str();
    rep.parameters["include_cost_in_templates"] =
        opt.include_cost_in_templates ? "true" : "false";
}

struct TranslatedSystem {
    LinearSystem lp;
    long constraints = 0;
};

TranslatedSystem translate_all(const std::vector<ImplicationConstraint>& constraints, int K,
                               VarPool& pool, std::optional<LinearCombo> objective) {
    std::vector<LinearSystem> fragments;
    fragments.reserve(constraints.size());
    for (auto& c : constraints)
        fragments.push_back(translate(c, K, pool));
    TranslatedSystem out;
    out.lp = assemble(std::move(fragments), std::move(objective));
    out.constraints = static_cast<long>(constraints.size());
    return out;
}

void maybe_emit(const AnalysisOptions& opt, const LinearSystem& lp, const VarPool& pool) {
    if (opt.emit_lp_path.empty())
        return;
    std::ofstream out(opt.emit_lp_path);
    if (!out)
        throw SemanticError("cannot write LP dump to " + opt.emit_lp_path);
    out << emit_lp(lp, pool);
}

Solution run_solver(const AnalysisOptions& opt, const LinearSystem& lp, const VarPool& pool) {
    SolverOptions sopt;
    sopt.pivot_cap = opt.pivot_cap;
    return solver_backend(lp, pool, opt.solver.empty() ? "exact" : opt.solver, sopt);
}

} // namespace

PreparedSystem prepare(const std::string& path, const std::string& invariant_text,
                       const std::string& system_tag, const AnalysisOptions& opt) {
    PreparedSystem out;
    out.ts = parse_file(path);
    PropagateOptions popt;
    popt.widen_after = opt.widen_after;
    out.inv = propagate_intervals(out.ts, popt);
    if (!invariant_text.empty()) {
        InvariantMap user = parse_invariant_file(invariant_text, system_tag);
        out.inv = merge_annotations(out.inv, complete_invariants(out.ts, user));
    }
    return out;
}

void check_shared_interface(const TransitionSystem& ts_new, const TransitionSystem& ts_old) {
    std::set<std::string> a(ts_new.variables.begin(), ts_new.variables.end());
    std::set<std::string> b(ts_old.variables.begin(), ts_old.variables.end());
    if (a != b)
        throw SemanticError("the two systems do not share the same variable set");
    auto canon = [](const Assertion& t) {
        std::vector<Polynomial> ps;
        for (auto& c : t.conjuncts)
            ps.push_back(c.poly());
        std::sort(ps.begin(), ps.end());
        return ps;
    };
    if (canon(ts_new.theta0) != canon(ts_old.theta0))
        throw SemanticError("the two systems do not share Theta0");
}

AnalysisReport cmd_diff(const PreparedSystem& sys_new, const PreparedSystem& sys_old,
                        const AnalysisOptions& opt) {
    auto t0 = Clock::now();
    AnalysisReport rep;
    rep.mode = AnalysisMode::Diff;
    record_params(rep, opt);
    record_invariants(rep, "new", sys_new);
    record_invariants(rep, "old", sys_old);
    check_shared_interface(sys_new.ts, sys_old.ts);

    auto t_constraints = Clock::now();
    VarPool pool;
    int t_var = pool.intern("t", /*nonneg=*/false);
    TemplateMap tmpl_new =
        fix_templates(sys_new.ts, opt.degree, "new", opt.include_cost_in_templates, pool);
    TemplateMap tmpl_old =
        fix_templates(sys_old.ts, opt.degree, "old", opt.include_cost_in_templates, pool);

    auto constraints = collect_pf_constraints(sys_new.ts, sys_new.inv, tmpl_new);
    auto anti = collect_antipf_constraints(sys_old.ts, sys_old.inv, tmpl_old);
    constraints.insert(constraints.end(), anti.begin(), anti.end());
    constraints.push_back(collect_diffcost_constraint(sys_new.ts.theta0, tmpl_new,
                                                      sys_new.ts.initial, tmpl_old,
                                                      sys_old.ts.initial, t_var));
    rep.timings_s["constraints"] = seconds_since(t_constraints);

    auto t_translate = Clock::now();
    LinearCombo objective;
    objective.add(t_var, Rational(1));
    auto translated = translate_all(constraints, opt.effective_k(), pool, objective);
    rep.warnings = translated.lp.warnings;
    maybe_emit(opt, translated.lp, pool);
    rep.timings_s["translate"] = seconds_since(t_translate);

    auto t_solve = Clock::now();
    Solution sol = run_solver(opt, translated.lp, pool);
    rep.timings_s["solve"] = seconds_since(t_solve);
    rep.solver_status = sol.status;

    if (sol.status == SolveStatus::Optimal) {
        rep.status = "threshold";
        rep.witness = extract_witness(sol, AnalysisMode::Diff, tmpl_new, tmpl_old, t_var);
        rep.threshold_raw = rep.witness->threshold_raw;
        rep.threshold_int = rep.witness->threshold_int;
    } else {
        rep.status = "unknown";
    }
    rep.timings_s["total"] = seconds_since(t0);
    return rep;
}

AnalysisReport cmd_verify(const PreparedSystem& sys_new, const PreparedSystem& sys_old,
                          const Polynomial& bound, const AnalysisOptions& opt) {
    auto t0 = Clock::now();
    AnalysisReport rep;
    rep.mode = AnalysisMode::Verify;
    record_params(rep, opt);
    rep.parameters["bound"] = bound.str();
    record_invariants(rep, "new", sys_new);
    record_invariants(rep, "old", sys_old);
    check_shared_interface(sys_new.ts, sys_old.ts);
    for (auto& v : bound.variables())
        if (!sys_new.ts.has_variable(v))
            throw SemanticError("bound uses unknown variable " + v);

    VarPool pool;
    TemplateMap tmpl_new =
        fix_templates(sys_new.ts, opt.degree, "new", opt.include_cost_in_templates, pool);
    TemplateMap tmpl_old =
        fix_templates(sys_old.ts, opt.degree, "old", opt.include_cost_in_templates, pool);

    auto constraints = collect_pf_constraints(sys_new.ts, sys_new.inv, tmpl_new);
    auto anti = collect_antipf_constraints(sys_old.ts, sys_old.inv, tmpl_old);
    constraints.insert(constraints.end(), anti.begin(), anti.end());
    constraints.push_back(collect_symbolic_bound_constraint(sys_new.ts.theta0, tmpl_new,
                                                            sys_new.ts.initial, tmpl_old,
                                                            sys_old.ts.initial, bound));

    auto translated = translate_all(constraints, opt.effective_k(), pool, std::nullopt);
    rep.warnings = translated.lp.warnings;
    maybe_emit(opt, translated.lp, pool);

    auto t_solve = Clock::now();
    Solution sol = run_solver(opt, translated.lp, pool);
    rep.timings_s["solve"] = seconds_since(t_solve);
    rep.solver_status = sol.status;

    if (sol.status == SolveStatus::Feasible || sol.status == SolveStatus::Optimal) {
        rep.status = "verified";
        rep.witness = extract_witness(sol, AnalysisMode::Verify, tmpl_new, tmpl_old, -1);
    } else {
        rep.status = "unknown";
    }
    rep.timings_s["total"] = seconds_since(t0);
    return rep;
}

namespace {

// All corner points of Theta0's interval box; every variable must have both
// bounds derivable (cost is pinned to zero).
std::vector<Valuation> theta0_corners(const TransitionSystem& ts) {
    detail::Box box;
    detail::refine_box(box, ts.theta0.conjuncts);
    std::vector<std::string> vars;
    std::vector<std::vector<std::int64_t>> choices;
    for (auto& v : ts.variables) {
        if (v == kCostVar) {
            vars.push_back(v);
            choices.push_back({0});
            continue;
        }
        detail::Interval iv = detail::box_get(box, v);
        if (iv.empty)
            throw SemanticError("theta0 is empty");
        if (!iv.lo || !iv.hi) {
            // Unconstrained variables that are overwritten before being read
            // do not affect the sweep; pin them to zero.
            vars.push_back(v);
            choices.push_back({0});
            continue;
        }
        std::int64_t lo = iv.lo->floor().get_si();
        std::int64_t hi = iv.hi->floor().get_si();
        vars.push_back(v);
        if (lo == hi)
            choices.push_back({lo});
        else
            choices.push_back({lo, hi});
    }
    std::vector<Valuation> out;
    std::vector<std::size_t> idx(vars.size(), 0);
    for (;;) {
        Valuation x;
        for (std::size_t i = 0; i < vars.size(); ++i)
            x[vars[i]] = choices[i][idx[i]];
        if (ts.theta0.holds(x))
            out.push_back(std::move(x));
        std::size_t i = 0;
        for (; i < vars.size(); ++i) {
            if (idx[i] + 1 < choices[i].size()) {
                ++idx[i];
                for (std::size_t j = 0; j < i; ++j)
                    idx[j] = 0;
                break;
            }
        }
        if (i == vars.size())
            break;
    }
    return out;
}

} // namespace

AnalysisReport cmd_refute(const PreparedSystem& sys_new, const PreparedSystem& sys_old,
                          const Rational& threshold, std::optional<Valuation> x0,
                          bool sweep_corners, const AnalysisOptions& opt) {
    auto t0 = Clock::now();
    AnalysisReport rep;
    rep.mode = AnalysisMode::Refute;
    record_params(rep, opt);
    rep.parameters["threshold"] = threshold.str();
    record_invariants(rep, "new", sys_new);
    record_invariants(rep, "old", sys_old);
    check_shared_interface(sys_new.ts, sys_old.ts);

    std::vector<Valuation> candidates;
    if (sweep_corners) {
        candidates = theta0_corners(sys_new.ts);
    } else {
        if (!x0)
            throw SemanticError("refutation needs a witness input or --sweep-corners");
        for (auto& v : sys_new.ts.variables)
            if (!x0->count(v))
                (*x0)[v] = 0;
        if (!sys_new.ts.theta0.holds(*x0))
            throw SemanticError("refutation witness input does not satisfy theta0");
        candidates.push_back(*x0);
    }

    rep.status = "unknown";
    for (auto& cand : candidates) {
        VarPool pool;
        TemplateMap tmpl_new_anti =
            fix_templates(sys_new.ts, opt.degree, "newanti", opt.include_cost_in_templates, pool);
        TemplateMap tmpl_old_pf =
            fix_templates(sys_old.ts, opt.degree, "oldpf", opt.include_cost_in_templates, pool);
        auto constraints = collect_refutation_constraints(
            sys_new.ts, sys_new.inv, tmpl_new_anti, sys_old.ts, sys_old.inv, tmpl_old_pf, cand,
            threshold, opt.eps);
        auto translated = translate_all(constraints, opt.effective_k(), pool, std::nullopt);
        rep.warnings = translated.lp.warnings;
        maybe_emit(opt, translated.lp, pool);

        Solution sol = run_solver(opt, translated.lp, pool);
        rep.solver_status = sol.status;
        if (sol.status == SolveStatus::Feasible || sol.status == SolveStatus::Optimal) {
            rep.status = "refuted";
            rep.witness = extract_witness(sol, AnalysisMode::Refute, tmpl_old_pf, tmpl_new_anti, -1);
            rep.witness->threshold_raw = threshold;
            rep.witness->threshold_int = threshold.floor();
            rep.threshold_raw = threshold;
            rep.threshold_int = threshold.floor();
            rep.refute_input = cand;
            break;
        }
    }
    rep.timings_s["total"] = seconds_since(t0);
    return rep;
}

AnalysisReport cmd_single(const PreparedSystem& sys, const AnalysisOptions& opt) {
    auto t0 = Clock::now();
    AnalysisReport rep;
    rep.mode = AnalysisMode::Single;
    record_params(rep, opt);
    record_invariants(rep, "program", sys);

    VarPool pool;
    int p_var = pool.intern("p", /*nonneg=*/false);
    TemplateMap tmpl_pf =
        fix_templates(sys.ts, opt.degree, "pf", opt.include_cost_in_templates, pool);
    TemplateMap tmpl_anti =
        fix_templates(sys.ts, opt.degree, "anti", opt.include_cost_in_templates, pool);

    auto constraints =
        collect_precision_constraints(sys.ts, sys.inv, tmpl_pf, tmpl_anti, p_var);
    LinearCombo objective;
    objective.add(p_var, Rational(1));
    auto translated = translate_all(constraints, opt.effective_k(), pool, objective);
    rep.warnings = translated.lp.warnings;
    maybe_emit(opt, translated.lp, pool);

    auto t_solve = Clock::now();
    Solution sol = run_solver(opt, translated.lp, pool);
    rep.timings_s["solve"] = seconds_since(t_solve);
    rep.solver_status = sol.status;

    if (sol.status == SolveStatus::Optimal) {
        rep.status = "threshold";
        rep.witness = extract_witness(sol, AnalysisMode::Single, tmpl_pf, tmpl_anti, p_var);
        rep.threshold_raw = rep.witness->threshold_raw;
        rep.threshold_int = rep.witness->threshold_int;
    } else {
        rep.status = "unknown";
    }
    rep.timings_s["total"] = seconds_since(t0);
    return rep;
}

std::string AnalysisReport::to_text() const {
    std::ostringstream os;
    os << "mode: " << diffcost::to_string(mode) << "\n";
    os << "status: " << status << " (solver: " << diffcost::to_string(solver_status) << ")\n";
    if (threshold_raw) {
        const char* label = mode == AnalysisMode::Single ? "precision" : "threshold";
        os << label << ": " << threshold_raw->str() << " (integer floor "
           << threshold_int->get_str() << ")\n";
    }
    if (refute_input) {
        os << "witness input:";
        for (auto& [v, k] : *refute_input)
            os << " " << v << "=" << k;
        os << "\n";
    }
    if (witness) {
        os << "upper bound (" << witness->upper_system << "):\n";
        for (auto& [loc, p] : witness->upper)
            os << "  " << loc << ": " << p.str() << "\n";
        os << "lower bound (" << witness->lower_system << "):\n";
        for (auto& [loc, p] : witness->lower)
            os << "  " << loc << ": " << p.str() << "\n";
    }
    os << "parameters:";
    for (auto& [k, v] : parameters)
        os << " " << k << "=" << v;
    os << "\n";
    os << "invariants assumed:\n";
    for (auto& [sys, locs] : invariants_assumed)
        for (auto& [loc, a] : locs)
            os << "  [" << sys << "] " << loc << ": " << a << "\n";
    for (auto& w : warnings)
        os << "warning: " << w << "\n";
    os << "timings:";
    for (auto& [k, v] : timings_s) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " %s=%.3fs", k.c_str(), v);
        os << buf;
    }
    os << "\n";
    return os.str();
}

std::string AnalysisReport::to_json() const {
    nlohmann::json j;
    j["mode"] = diffcost::to_string(mode);
    j["status"] = status;
    j["solver_status"] = diffcost::to_string(solver_status);
    if (threshold_raw) {
        j["threshold_raw"] = threshold_raw->str();
        j["threshold_int"] = threshold_int->get_str();
    }
    if (refute_input) {
        nlohmann::json w;
        for (auto& [v, k] : *refute_input)
            w[v] = k;
        j["witness_input"] = w;
    }
    if (witness) {
        nlohmann::json upper, lower;
        for (auto& [loc, p] : witness->upper)
            upper[loc] = p.str();
        for (auto& [loc, p] : witness->lower)
            lower[loc] = p.str();
        j["witness"] = {{"upper_system", witness->upper_system},
                        {"lower_system", witness->lower_system},
                        {"upper", upper},
                        {"lower", lower}};
    }
    j["parameters"] = parameters;
    nlohmann::json inv;
    for (auto& [sys, locs] : invariants_assumed)
        inv[sys] = locs;
    j["invariants_assumed"] = inv;
    j["warnings"] = warnings;
    j["timings_s"] = timings_s;
    return j.dump(2);
}

} // namespace diffcost
