// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/witness_check.hpp"

#include <sstream>

namespace diffcost {

namespace {

std::string point_str(const Valuation& x) {
    std::ostringstream os;
    bool first = true;
    for (auto& [v, k] : x) {
        if (!first)
            os << ", ";
        first = false;
        os << v << "=" << k;
    }
    return os.str();
}

} // namespace

WitnessCheck check_witness(const Witness& w, const TransitionSystem& ts_new,
                           const TransitionSystem& ts_old, const RunBudget& budget,
                           const std::optional<Polynomial>& verify_bound,
                           const std::optional<Valuation>& refute_x0) {
    WitnessCheck rep;
    auto fail = [&](const std::string& msg, const Valuation& x) {
        rep.pass = false;
        rep.failures.push_back(msg + " at " + point_str(x));
    };

    // In Refute mode the PF lives on the old system and the anti-PF on the
    // new one; everywhere else it is the other way around.
    const TransitionSystem& ts_upper = w.mode == AnalysisMode::Refute ? ts_old : ts_new;
    const TransitionSystem& ts_lower = w.mode == AnalysisMode::Refute ? ts_new : ts_old;

    for (auto& x0 : initial_points(ts_new, budget)) {
        ++rep.points_checked;
        CostExtremes up_ext = cost_extremes(ts_upper, x0, budget);
        CostExtremes lo_ext = cost_extremes(ts_lower, x0, budget);
        Rational phi = w.upper.at(ts_upper.initial).eval(x0);
        Rational chi = w.lower.at(ts_lower.initial).eval(x0);
        if (phi < Rational(up_ext.sup))
            fail("PF " + phi.str() + " below CostSup " + std::to_string(up_ext.sup), x0);
        if (chi > Rational(lo_ext.inf))
            fail("anti-PF " + chi.str() + " above CostInf " + std::to_string(lo_ext.inf), x0);

        switch (w.mode) {
        case AnalysisMode::Diff:
        case AnalysisMode::Single:
            if (w.threshold_raw < phi - chi)
                fail("threshold " + w.threshold_raw.str() + " below PF-antiPF gap " +
                         (phi - chi).str(),
                     x0);
            break;
        case AnalysisMode::Verify:
            if (verify_bound && verify_bound->eval(x0) < phi - chi)
                fail("symbolic bound below PF-antiPF gap", x0);
            break;
        case AnalysisMode::Refute:
            break; // closing inequality checked at the witness input below
        }
    }

    if (w.mode == AnalysisMode::Refute) {
        if (!refute_x0) {
            rep.pass = false;
            rep.failures.push_back("refutation witness input missing");
        } else {
            const Valuation& x0 = *refute_x0;
            Rational chi_new = w.lower.at(ts_new.initial).eval(x0);
            Rational phi_old = w.upper.at(ts_old.initial).eval(x0);
            if (!(chi_new - phi_old > w.threshold_raw))
                fail("refutation margin not strict: " + (chi_new - phi_old).str() +
                         " vs threshold " + w.threshold_raw.str(),
                     x0);
            CostExtremes n = cost_extremes(ts_new, x0, budget);
            CostExtremes o = cost_extremes(ts_old, x0, budget);
            if (!(Rational(n.inf - o.sup) > w.threshold_raw))
                fail("oracle does not confirm strict exceedance: CostInf_new - CostSup_old = " +
                         std::to_string(n.inf - o.sup),
                     x0);
        }
    }
    return rep;
}

} // namespace diffcost
