// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/analysis.hpp"
#include "diffcost/bench.hpp"
#include "diffcost/oracle.hpp"
#include "diffcost/parse.hpp"
#include "diffcost/witness_check.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace diffcost;

std::string read_file_or_empty(const std::string& path) {
    if (path.empty())
        return "";
    std::ifstream in(path);
    if (!in)
        throw SemanticError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Valuation parse_valuation(const std::string& text) {
    Valuation x;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        auto eq = part.find('=');
        if (eq == std::string::npos)
            throw SemanticError("expected var=value in '" + part + "'");
        std::string var = part.substr(0, eq);
        var.erase(0, var.find_first_not_of(" \t"));
        var.erase(var.find_last_not_of(" \t") + 1);
        x[var] = std::stoll(part.substr(eq + 1));
    }
    return x;
}

std::map<std::string, std::pair<std::int64_t, std::int64_t>>
parse_box(const std::string& text) {
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> box;
    if (text.empty())
        return box;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        auto eq = part.find('=');
        auto colon = part.find(':', eq);
        if (eq == std::string::npos || colon == std::string::npos)
            throw SemanticError("expected var=lo:hi in '" + part + "'");
        std::string var = part.substr(0, eq);
        var.erase(0, var.find_first_not_of(" \t"));
        var.erase(var.find_last_not_of(" \t") + 1);
        box[var] = {std::stoll(part.substr(eq + 1, colon - eq - 1)),
                    std::stoll(part.substr(colon + 1))};
    }
    return box;
}

int report_exit(const AnalysisReport& rep, bool json) {
    std::cout << (json ? rep.to_json() : rep.to_text());
    if (!json)
        std::cout.flush();
    return rep.conclusive() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"differential cost analyzer: potential/anti-potential synthesis via "
                 "Handelman translation and exact LP"};
    app.require_subcommand(1);

    AnalysisOptions opt;
    std::string inv_path, eps_text = "1";
    bool json = false;
    app.add_option("--degree,-d", opt.degree, "template degree d (default 2)");
    app.add_option("--prodk,-K", opt.prodk, "product size bound K (default: d)");
    app.add_option("--invariants", inv_path, "user invariant annotation file");
    app.add_option("--solver", opt.solver, "exact | external:<cmd>");
    app.add_option("--eps", eps_text, "strictness margin for refutation (default 1)");
    app.add_option("--emit-lp", opt.emit_lp_path, "write the assembled LP to a file");
    app.add_flag("--include-cost-in-templates", opt.include_cost_in_templates,
                 "include cost in template monomials");
    app.add_option("--widen-after", opt.widen_after, "interval widening threshold (default 5)");
    app.add_option("--pivot-cap", opt.pivot_cap, "simplex pivot cap (default 1e6)");
    app.add_flag("--json", json, "machine-readable report");

    std::string new_path, old_path, bound_text, threshold_text, input_text, box_text;
    bool sweep = false;
    long long oracle_steps = 100000;

    auto* cdiff = app.add_subcommand("diff", "minimized differential threshold");
    cdiff->add_option("new", new_path)->required();
    cdiff->add_option("old", old_path)->required();

    auto* cverify = app.add_subcommand("verify", "verify a symbolic polynomial bound");
    cverify->add_option("new", new_path)->required();
    cverify->add_option("old", old_path)->required();
    cverify->add_option("--bound", bound_text, "polynomial over program variables")->required();

    auto* crefute = app.add_subcommand("refute", "refute a candidate threshold");
    crefute->add_option("new", new_path)->required();
    crefute->add_option("old", old_path)->required();
    crefute->add_option("--threshold,-t", threshold_text)->required();
    crefute->add_option("--input", input_text, "witness input, e.g. lenA=100,lenB=100");
    crefute->add_flag("--sweep-corners", sweep, "try all corner points of theta0's box");

    auto* csingle = app.add_subcommand("single", "single-program bounds with precision gap");
    csingle->add_option("program", new_path)->required();

    std::string suite_path;
    int workers = 4;
    auto* cbench = app.add_subcommand("bench", "run a regression suite");
    cbench->add_option("suite", suite_path)->required();
    cbench->add_option("--workers", workers, "parallel workers (default 4)");

    auto* coracle = app.add_subcommand("oracle", "exhaustive cost enumeration on a box");
    coracle->add_option("new", new_path)->required();
    coracle->add_option("old", old_path, "optional second system for max-diff");
    coracle->add_option("--box", box_text, "var=lo:hi, comma separated");
    coracle->add_option("--max-steps", oracle_steps, "per-run step budget (default 1e5)");

    auto* cdump = app.add_subcommand("dump", "print the lowered transition system");
    cdump->add_option("program", new_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        opt.eps = Rational::parse(eps_text);
        std::string inv_text = read_file_or_empty(inv_path);

        if (cdiff->parsed()) {
            PreparedSystem a = prepare(new_path, inv_text, "new", opt);
            PreparedSystem b = prepare(old_path, inv_text, "old", opt);
            return report_exit(cmd_diff(a, b, opt), json);
        }
        if (cverify->parsed()) {
            PreparedSystem a = prepare(new_path, inv_text, "new", opt);
            PreparedSystem b = prepare(old_path, inv_text, "old", opt);
            return report_exit(cmd_verify(a, b, parse_polynomial(bound_text), opt), json);
        }
        if (crefute->parsed()) {
            PreparedSystem a = prepare(new_path, inv_text, "new", opt);
            PreparedSystem b = prepare(old_path, inv_text, "old", opt);
            std::optional<Valuation> x0;
            if (!input_text.empty())
                x0 = parse_valuation(input_text);
            return report_exit(
                cmd_refute(a, b, Rational::parse(threshold_text), x0, sweep, opt), json);
        }
        if (csingle->parsed()) {
            PreparedSystem a = prepare(new_path, inv_text, "", opt);
            return report_exit(cmd_single(a, opt), json);
        }
        if (cbench->parsed()) {
            auto slash = suite_path.find_last_of('/');
            std::string dir = slash == std::string::npos ? "" : suite_path.substr(0, slash);
            auto entries = load_suite(suite_path);
            auto results = run_suite(entries, opt, dir, workers);
            std::cout << render_table(results);
            return all_expectations_met(results) ? 0 : 1;
        }
        if (coracle->parsed()) {
            TransitionSystem a = parse_file(new_path);
            RunBudget budget = derive_budget(a, 4);
            budget.max_steps = oracle_steps;
            for (auto& [v, r] : parse_box(box_text))
                budget.input_box[v] = r;
            if (!old_path.empty()) {
                TransitionSystem b = parse_file(old_path);
                std::cout << "max CostSup_new - CostInf_old over box: "
                          << max_diff(a, b, budget) << "\n";
            } else {
                for (auto& x0 : initial_points(a, budget)) {
                    CostExtremes ce = cost_extremes(a, x0, budget);
                    for (auto& [v, k] : x0)
                        if (v != kCostVar)
                            std::cout << v << "=" << k << " ";
                    std::cout << "-> inf " << ce.inf << ", sup " << ce.sup << "\n";
                }
            }
            return 0;
        }
        if (cdump->parsed()) {
            std::cout << print_ts(parse_file(new_path));
            return 0;
        }
    } catch (const StepBudgetExhausted& ex) {
        std::cerr << "oracle: " << ex.what() << "\n"
                  << "The analysis assumes terminating systems; see README on the "
                     "termination precondition.\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 2;
}
