// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/parse.hpp"

#include "lexer.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace diffcost {

using detail::ExprParser;
using detail::Lexer;
using detail::Tok;

namespace {

using detail::parse_conjunction;

Update parse_update(Lexer& lx) {
    Update up;
    for (;;) {
        std::string var = lx.expect_ident();
        lx.expect(":=");
        if (lx.accept_kw("nondet")) {
            NondetUpdate nd;
            if (lx.accept_kw("in")) {
                lx.expect("[");
                nd.lower = detail::to_affine_or_fail(lx, ExprParser(lx).expr(), "nondet bound");
                lx.expect(",");
                nd.upper = detail::to_affine_or_fail(lx, ExprParser(lx).expr(), "nondet bound");
                lx.expect("]");
            } else if (lx.accept(">=")) {
                nd.lower = detail::to_affine_or_fail(lx, ExprParser(lx).expr(), "nondet bound");
            } else if (lx.accept("<=")) {
                nd.upper = detail::to_affine_or_fail(lx, ExprParser(lx).expr(), "nondet bound");
            }
            up.set_nondet(var, nd);
        } else {
            up.set(var, ExprParser(lx).expr());
        }
        if (!lx.accept(","))
            break;
    }
    return up;
}

} // namespace

TransitionSystem parse_transition_system(const std::string& text) {
    Lexer lx(text, /*hash_comments=*/true);
    TransitionSystem ts;
    bool saw_vars = false, saw_init = false, saw_terminal = false, saw_theta0 = false;

    while (!lx.at_end()) {
        if (lx.accept_kw("vars")) {
            if (saw_vars)
                lx.fail("duplicate 'vars' declaration");
            saw_vars = true;
            while (lx.peek().kind == Tok::Ident)
                ts.variables.push_back(lx.next().text);
            lx.expect(";");
        } else if (lx.accept_kw("init")) {
            saw_init = true;
            ts.initial = lx.expect_ident();
            lx.expect(";");
        } else if (lx.accept_kw("terminal")) {
            saw_terminal = true;
            ts.terminal = lx.expect_ident();
            lx.expect(";");
        } else if (lx.accept_kw("theta0")) {
            saw_theta0 = true;
            ts.theta0 = parse_conjunction(lx, "theta0 conjunct");
            lx.expect(";");
        } else if (lx.accept_kw("trans")) {
            Transition t;
            t.source = lx.expect_ident();
            lx.expect("->");
            t.target = lx.expect_ident();
            if (lx.accept_kw("guard"))
                t.guard = parse_conjunction(lx, "guard");
            if (lx.accept_kw("update"))
                t.update = parse_update(lx);
            lx.expect(";");
            ts.transitions.push_back(std::move(t));
        } else {
            lx.fail("expected 'vars', 'init', 'terminal', 'theta0' or 'trans'");
        }
    }

    if (!saw_vars)
        throw SemanticError("missing 'vars' declaration");
    if (!saw_init || !saw_terminal)
        throw SemanticError("missing 'init' or 'terminal' declaration");
    if (!saw_theta0)
        throw SemanticError("missing 'theta0' declaration");

    // Location set is implied by usage.
    auto add_loc = [&](const std::string& l) {
        if (!ts.has_location(l))
            ts.locations.push_back(l);
    };
    add_loc(ts.initial);
    for (auto& t : ts.transitions) {
        add_loc(t.source);
        add_loc(t.target);
    }
    add_loc(ts.terminal);

    // The terminal self-loop may be left implicit in the file.
    bool has_terminal_loop = false;
    for (auto& t : ts.transitions)
        if (t.source == ts.terminal)
            has_terminal_loop = true;
    if (!has_terminal_loop)
        ts.transitions.push_back({ts.terminal, ts.terminal, {}, Update::identity(), ""});

    ts.assign_ids();
    ts.validate();
    return ts;
}

TransitionSystem parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw SemanticError("cannot open input file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    TransitionSystem ts;
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".imp") == 0)
        ts = parse_program(text);
    else if (path.size() >= 3 && path.compare(path.size() - 3, 3, ".ts") == 0)
        ts = parse_transition_system(text);
    else
        throw SemanticError("unknown input extension (expected .ts or .imp): " + path);
    if (ts.name.empty()) {
        auto slash = path.find_last_of('/');
        ts.name = slash == std::string::npos ? path : path.substr(slash + 1);
    }
    return ts;
}

Polynomial parse_polynomial(const std::string& text) {
    Lexer lx(text, /*hash_comments=*/true);
    Polynomial p = ExprParser(lx).expr();
    if (!lx.at_end())
        lx.fail("trailing input after expression");
    return p;
}

} // namespace diffcost
