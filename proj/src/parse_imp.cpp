// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/parse.hpp"

#include "lexer.hpp"

#include <algorithm>
#include <memory>
#include <set>

namespace diffcost {

using detail::ExprParser;
using detail::Lexer;
using detail::Tok;

namespace {

// ---------------------------------------------------------------- condition

struct Cond;
using CondPtr = std::shared_ptr<Cond>;

struct Cond {
    enum Kind { Cmp, And, Or, Not } kind;
    // Cmp
    Polynomial lhs, rhs;
    std::string op;
    // And/Or/Not
    CondPtr a, b;
};

CondPtr mk_cmp(Polynomial l, std::string op, Polynomial r) {
    auto c = std::make_shared<Cond>();
    c->kind = Cond::Cmp;
    c->lhs = std::move(l);
    c->rhs = std::move(r);
    c->op = std::move(op);
    return c;
}
CondPtr mk2(Cond::Kind k, CondPtr a, CondPtr b) {
    auto c = std::make_shared<Cond>();
    c->kind = k;
    c->a = std::move(a);
    c->b = std::move(b);
    return c;
}

// Disjunct: conjunction of affine >=0 polys. A disjunct with a negative
// constant conjunct is statically false and dropped; constant nonnegative
// conjuncts are dropped from the disjunct.
using Disjunct = std::vector<Polynomial>;

constexpr std::size_t kMaxDisjuncts = 64;

std::vector<Disjunct> atom_disjuncts(const Cond& c, bool negated) {
    std::string op = c.op;
    if (negated) {
        if (op == "<") op = ">=";
        else if (op == "<=") op = ">";
        else if (op == ">") op = "<=";
        else if (op == ">=") op = "<";
        else if (op == "==") op = "!=";
        else if (op == "!=") op = "==";
    }
    if (op == "!=") {
        // two branches: lhs < rhs or lhs > rhs
        return {{c.rhs - c.lhs - Polynomial(1)}, {c.lhs - c.rhs - Polynomial(1)}};
    }
    return {detail::normalize_cmp(c.lhs, op, c.rhs)};
}

std::vector<Disjunct> dnf(const Cond& c, bool negated) {
    switch (c.kind) {
    case Cond::Cmp:
        return atom_disjuncts(c, negated);
    case Cond::Not:
        return dnf(*c.a, !negated);
    case Cond::And:
    case Cond::Or: {
        bool conj = (c.kind == Cond::And) != negated;
        auto da = dnf(*c.a, negated);
        auto db = dnf(*c.b, negated);
        std::vector<Disjunct> out;
        if (conj) {
            for (auto& x : da)
                for (auto& y : db) {
                    Disjunct d = x;
                    d.insert(d.end(), y.begin(), y.end());
                    out.push_back(std::move(d));
                }
        } else {
            out = da;
            out.insert(out.end(), db.begin(), db.end());
        }
        if (out.size() > kMaxDisjuncts)
            throw SemanticError("condition expands to too many disjuncts");
        return out;
    }
    }
    throw SemanticError("unreachable condition kind");
}

// Prunes statically-decided constant conjuncts; empty result = false branch.
std::vector<Assertion> cond_branches(const Cond& c, bool negated) {
    std::vector<Assertion> out;
    for (auto& d : dnf(c, negated)) {
        Assertion a;
        bool dead = false;
        for (auto& p : d) {
            if (p.degree() > 1)
                throw SemanticError(
                    "guards must be affine (rewrite through a dummy variable): " + p.str());
            if (p.is_constant()) {
                if (p.constant_term().sign() < 0)
                    dead = true;
                continue;
            }
            a.conjuncts.push_back(AffineExpr(p));
        }
        if (!dead)
            out.push_back(std::move(a));
    }
    return out;
}

// --------------------------------------------------------------- statements

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct Stmt {
    enum Kind { Decl, Assign, AssignNondet, While, For, If } kind;
    // Decl / Assign / AssignNondet
    std::string var;
    Polynomial rhs;
    bool has_init = false;
    bool nondet_rhs = false;
    std::optional<AffineExpr> nd_lo, nd_hi;
    // While / For / If
    CondPtr cond;
    std::vector<StmtPtr> body;  // then-branch for If
    std::vector<StmtPtr> body2; // else-branch
    StmtPtr for_init, for_incr;
};

struct Program {
    std::string name;
    std::vector<std::string> params;
    CondPtr assume; // may be null
    std::vector<StmtPtr> stmts;
};

class ImpParser {
  public:
    explicit ImpParser(const std::string& text) : lx_(text, /*hash_comments=*/false) {}

    Program parse() {
        Program prog;
        lx_.expect_kw("void");
        prog.name = lx_.expect_ident();
        lx_.expect("(");
        if (!lx_.accept(")")) {
            for (;;) {
                lx_.expect_kw("int");
                prog.params.push_back(declare(lx_.expect_ident()));
                if (!lx_.accept(","))
                    break;
            }
            lx_.expect(")");
        }
        lx_.expect("{");
        if (lx_.accept_kw("assume")) {
            lx_.expect("(");
            prog.assume = cond();
            lx_.expect(")");
            lx_.expect(";");
        }
        prog.stmts = stmt_list();
        lx_.expect("}");
        if (!lx_.at_end())
            lx_.fail("trailing input after function body");
        return prog;
    }

    const std::vector<std::string>& declared() const { return declared_; }

  private:
    std::string declare(std::string v) {
        if (v == kCostVar)
            lx_.fail("'cost' is implicit and cannot be declared");
        if (std::find(declared_.begin(), declared_.end(), v) != declared_.end())
            lx_.fail("duplicate declaration of '" + v + "'");
        declared_.push_back(v);
        return v;
    }

    std::vector<StmtPtr> stmt_list() {
        std::vector<StmtPtr> out;
        while (!(lx_.peek().kind == Tok::Punct && lx_.peek().text == "}")) {
            if (lx_.accept(";"))
                continue;
            out.push_back(stmt());
        }
        return out;
    }

    std::vector<StmtPtr> block() {
        if (lx_.accept("{")) {
            auto out = stmt_list();
            lx_.expect("}");
            return out;
        }
        return {stmt()};
    }

    StmtPtr stmt() {
        if (lx_.accept_kw("while")) {
            auto s = std::make_shared<Stmt>();
            s->kind = Stmt::While;
            lx_.expect("(");
            s->cond = cond();
            lx_.expect(")");
            s->body = block();
            return s;
        }
        if (lx_.accept_kw("for")) {
            auto s = std::make_shared<Stmt>();
            s->kind = Stmt::For;
            lx_.expect("(");
            if (!lx_.accept(";")) {
                s->for_init = simple_stmt();
                lx_.expect(";");
            }
            s->cond = cond();
            lx_.expect(";");
            if (!(lx_.peek().kind == Tok::Punct && lx_.peek().text == ")"))
                s->for_incr = simple_stmt();
            lx_.expect(")");
            s->body = block();
            return s;
        }
        if (lx_.accept_kw("if")) {
            auto s = std::make_shared<Stmt>();
            s->kind = Stmt::If;
            lx_.expect("(");
            s->cond = cond();
            lx_.expect(")");
            s->body = block();
            if (lx_.accept_kw("else"))
                s->body2 = block();
            return s;
        }
        if (lx_.peek().kind == Tok::Ident &&
            (lx_.peek().text == "assume" || lx_.peek().text == "return" ||
             lx_.peek().text == "break" || lx_.peek().text == "goto"))
            lx_.fail("unsupported construct '" + lx_.peek().text + "'");
        auto s = simple_stmt();
        lx_.expect(";");
        return s;
    }

    // declaration / assignment forms, no trailing ';'
    StmtPtr simple_stmt() {
        auto s = std::make_shared<Stmt>();
        if (lx_.accept_kw("int")) {
            s->kind = Stmt::Decl;
            s->var = declare(lx_.expect_ident());
            if (lx_.accept("=")) {
                s->has_init = true;
                rhs_into(*s);
            }
            return s;
        }
        std::string v = lx_.expect_ident();
        s->var = v;
        if (lx_.accept("++")) {
            s->kind = Stmt::Assign;
            s->rhs = Polynomial::var(v) + Polynomial(1);
            return s;
        }
        if (lx_.accept("--")) {
            s->kind = Stmt::Assign;
            s->rhs = Polynomial::var(v) - Polynomial(1);
            return s;
        }
        if (lx_.accept("+=")) {
            s->kind = Stmt::Assign;
            s->rhs = Polynomial::var(v) + ExprParser(lx_).expr();
            return s;
        }
        if (lx_.accept("-=")) {
            s->kind = Stmt::Assign;
            s->rhs = Polynomial::var(v) - ExprParser(lx_).expr();
            return s;
        }
        lx_.expect("=");
        s->kind = Stmt::Assign;
        rhs_into(*s);
        return s;
    }

    void rhs_into(Stmt& s) {
        if (lx_.peek().kind == Tok::Ident && lx_.peek().text == "nondet") {
            lx_.next();
            lx_.expect("(");
            if (!lx_.accept(")")) {
                s.nd_lo = detail::to_affine_or_fail(lx_, ExprParser(lx_).expr(), "nondet bound");
                lx_.expect(",");
                s.nd_hi = detail::to_affine_or_fail(lx_, ExprParser(lx_).expr(), "nondet bound");
                lx_.expect(")");
            }
            s.nondet_rhs = true;
            if (s.kind == Stmt::Assign)
                s.kind = Stmt::AssignNondet;
            return;
        }
        s.rhs = ExprParser(lx_).expr();
    }

    CondPtr cond() { return cond_or(); }
    CondPtr cond_or() {
        CondPtr c = cond_and();
        while (lx_.accept("||"))
            c = mk2(Cond::Or, c, cond_and());
        return c;
    }
    CondPtr cond_and() {
        CondPtr c = cond_atom();
        while (lx_.accept("&&"))
            c = mk2(Cond::And, c, cond_atom());
        return c;
    }
    CondPtr cond_atom() {
        if (lx_.accept("!")) {
            auto c = std::make_shared<Cond>();
            c->kind = Cond::Not;
            c->a = cond_atom();
            return c;
        }
        if (lx_.peek().kind == Tok::Punct && lx_.peek().text == "(") {
            // Either a parenthesized condition or a parenthesized arithmetic
            // expression; try the condition reading first and fall back.
            std::size_t mark = lx_.save();
            try {
                lx_.expect("(");
                CondPtr inner = cond();
                lx_.expect(")");
                return inner;
            } catch (const ParseError&) {
                lx_.restore(mark);
            }
        }
        Polynomial lhs = ExprParser(lx_).expr();
        if (lx_.peek().kind != Tok::Punct)
            lx_.fail("expected comparison operator");
        std::string op = lx_.peek().text;
        if (op != "<" && op != "<=" && op != ">" && op != ">=" && op != "==" && op != "!=")
            lx_.fail("expected comparison operator, got '" + op + "'");
        lx_.next();
        Polynomial rhs = ExprParser(lx_).expr();
        return mk_cmp(std::move(lhs), op, std::move(rhs));
    }

    Lexer lx_;
    std::vector<std::string> declared_;
};

// ---------------------------------------------------------------- lowering

// One in-flight edge waiting for its target location.
struct Pending {
    std::string source;
    Assertion guard;
    Update update;
};

class Lowerer {
  public:
    explicit Lowerer(const Program& prog) : prog_(prog) {}

    TransitionSystem run() {
        ts_.name = prog_.name;
        ts_.variables = prog_.params;
        collect_locals(prog_.stmts);
        ts_.variables.push_back(kCostVar);

        if (prog_.assume) {
            auto branches = cond_branches(*prog_.assume, false);
            if (branches.empty())
                throw SemanticError("assume is statically false");
            if (branches.size() > 1)
                throw SemanticError("assume must be a conjunction of affine inequalities");
            ts_.theta0 = branches[0];
        }
        ts_.theta0.conjuncts.push_back(AffineExpr(Polynomial::var(kCostVar)));
        ts_.theta0.conjuncts.push_back(AffineExpr(-Polynomial::var(kCostVar)));

        std::string l0 = new_location();
        ts_.initial = l0;
        std::vector<Pending> frontier{{l0, {}, Update::identity()}};
        frontier = lower_block(prog_.stmts, std::move(frontier));

        ts_.terminal = "lout";
        ts_.locations.push_back(ts_.terminal);
        flush(frontier, ts_.terminal);
        ts_.transitions.push_back({ts_.terminal, ts_.terminal, {}, Update::identity(), ""});

        refresh_nondet_sources();
        ts_.assign_ids();
        ts_.validate();
        return ts_;
    }

  private:
    void collect_locals(const std::vector<StmtPtr>& stmts) {
        for (auto& s : stmts) {
            switch (s->kind) {
            case Stmt::Decl:
                ts_.variables.push_back(s->var);
                declared_.insert(s->var);
                if (s->has_init)
                    assigned_.insert(s->var);
                break;
            case Stmt::Assign:
            case Stmt::AssignNondet:
                assigned_.insert(s->var);
                break;
            case Stmt::While:
                collect_locals(s->body);
                break;
            case Stmt::For:
                if (s->for_init)
                    collect_locals({s->for_init});
                if (s->for_incr)
                    collect_locals({s->for_incr});
                collect_locals(s->body);
                break;
            case Stmt::If:
                collect_locals(s->body);
                collect_locals(s->body2);
                break;
            }
        }
    }

    std::string new_location() {
        std::string l = "l" + std::to_string(loc_counter_++);
        ts_.locations.push_back(l);
        return l;
    }

    int out_degree(const std::string& loc) const {
        int n = 0;
        for (auto& t : ts_.transitions)
            if (t.source == loc)
                ++n;
        return n;
    }

    // Emits every pending edge into `target`.
    void flush(const std::vector<Pending>& frontier, const std::string& target) {
        for (auto& p : frontier)
            ts_.transitions.push_back({p.source, target, p.guard, p.update, ""});
    }

    // Emits pending edges into a location and returns it. A lone pristine
    // pending edge (no guard, identity update, source unused so far) is
    // collapsed: the source itself becomes the flush point.
    std::string flush_to_point(std::vector<Pending> frontier) {
        if (frontier.size() == 1 && frontier[0].guard.is_true() &&
            frontier[0].update.is_identity() && out_degree(frontier[0].source) == 0 &&
            frontier[0].source != ts_.terminal)
            return frontier[0].source;
        std::string loc = new_location();
        flush(frontier, loc);
        return loc;
    }

    static bool is_simple(const Stmt& s) {
        return s.kind == Stmt::Decl || s.kind == Stmt::Assign || s.kind == Stmt::AssignNondet;
    }

    // Composes an assignment onto every pending edge, flushing first if a
    // right-hand side would read a nondeterministic value chosen on the same
    // edge.
    std::vector<Pending> compose(std::vector<Pending> frontier, const Stmt& s) {
        if (s.kind == Stmt::Decl && !s.has_init)
            return frontier; // pure declaration, no effect
        Update step;
        if (s.kind == Stmt::AssignNondet || s.nondet_rhs) {
            NondetUpdate nd;
            nd.lower = s.nd_lo;
            nd.upper = s.nd_hi;
            step.set_nondet(s.var, nd);
        } else {
            check_vars_declared(s.rhs);
            step.set(s.var, s.rhs);
        }
        bool needs_flush = false;
        for (auto& p : frontier) {
            try {
                (void)p.update.and_then(step);
            } catch (const SemanticError&) {
                needs_flush = true;
                break;
            }
        }
        if (needs_flush) {
            std::string loc = flush_to_point(std::move(frontier));
            frontier = {{loc, {}, Update::identity()}};
        }
        for (auto& p : frontier)
            p.update = p.update.and_then(step);
        return frontier;
    }

    void check_vars_declared(const Polynomial& p) {
        for (auto& v : p.variables())
            if (!ts_.has_variable(v) && v != kCostVar)
                throw SemanticError("use of undeclared variable '" + v + "'");
    }

    std::vector<Pending> lower_block(const std::vector<StmtPtr>& stmts,
                                     std::vector<Pending> frontier) {
        for (std::size_t i = 0; i < stmts.size(); ++i) {
            const Stmt& s = *stmts[i];
            switch (s.kind) {
            case Stmt::Decl:
            case Stmt::Assign:
            case Stmt::AssignNondet:
                frontier = compose(std::move(frontier), s);
                break;
            case Stmt::While:
            case Stmt::For: {
                if (s.kind == Stmt::For && s.for_init)
                    frontier = compose(std::move(frontier), *s.for_init);
                std::string head = flush_to_point(std::move(frontier));

                auto pos = cond_branches(*s.cond, false);
                auto neg = cond_branches(*s.cond, true);

                std::vector<Pending> body_frontier;
                for (auto& g : pos)
                    body_frontier.push_back({head, g, Update::identity()});
                if (!body_frontier.empty()) {
                    // A body whose first statement is an assignment gets its
                    // own location so updates never ride on guard edges.
                    if (!s.body.empty() && is_simple(*s.body.front())) {
                        std::string bodyloc = new_location();
                        flush(body_frontier, bodyloc);
                        body_frontier = {{bodyloc, {}, Update::identity()}};
                    }
                    body_frontier = lower_block(s.body, std::move(body_frontier));
                    if (s.kind == Stmt::For && s.for_incr)
                        body_frontier = compose(std::move(body_frontier), *s.for_incr);
                    flush(body_frontier, head); // back edges
                }

                frontier.clear();
                for (auto& g : neg)
                    frontier.push_back({head, g, Update::identity()});
                break;
            }
            case Stmt::If: {
                std::string branch = flush_to_point(std::move(frontier));
                auto pos = cond_branches(*s.cond, false);
                auto neg = cond_branches(*s.cond, true);

                std::vector<Pending> then_frontier, else_frontier;
                for (auto& g : pos)
                    then_frontier.push_back({branch, g, Update::identity()});
                for (auto& g : neg)
                    else_frontier.push_back({branch, g, Update::identity()});
                if (!then_frontier.empty())
                    then_frontier = lower_block(s.body, std::move(then_frontier));
                if (!else_frontier.empty())
                    else_frontier = lower_block(s.body2, std::move(else_frontier));

                frontier = std::move(then_frontier);
                frontier.insert(frontier.end(), else_frontier.begin(), else_frontier.end());
                break;
            }
            }
            if (frontier.empty() && i + 1 < stmts.size())
                throw SemanticError("unreachable statements after a statically-false branch");
        }
        return frontier;
    }

    // A declared-but-never-assigned variable acts as a nondeterminism source:
    // it receives a fresh unconstrained value on every edge entering a
    // location where it is read.
    void refresh_nondet_sources() {
        std::set<std::string> sources;
        for (auto& v : declared_)
            if (!assigned_.count(v))
                sources.insert(v);
        if (sources.empty())
            return;
        std::map<std::string, std::set<std::string>> reads_at;
        for (auto& t : ts_.transitions) {
            std::set<std::string> read;
            for (auto& a : t.guard.conjuncts)
                for (auto& v : a.poly().variables())
                    read.insert(v);
            for (auto& v : t.update.reads())
                read.insert(v);
            for (auto& v : read)
                if (sources.count(v))
                    reads_at[t.source].insert(v);
        }
        for (auto& t : ts_.transitions) {
            auto it = reads_at.find(t.target);
            if (it == reads_at.end())
                continue;
            for (auto& v : it->second)
                t.update.set_nondet(v, {});
        }
    }

    const Program& prog_;
    TransitionSystem ts_;
    std::set<std::string> declared_;
    std::set<std::string> assigned_;
    int loc_counter_ = 0;
};

} // namespace

TransitionSystem parse_program(const std::string& text) {
    ImpParser parser(text);
    Program prog = parser.parse();
    Lowerer lower(prog);
    return lower.run();
}

} // namespace diffcost
