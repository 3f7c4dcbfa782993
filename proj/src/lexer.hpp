// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "diffcost/parse.hpp"
#include "diffcost/poly.hpp"

#include <cctype>
#include <string>
#include <vector>

namespace diffcost::detail {

enum class Tok {
    Ident,
    Int,
    Punct, // any operator or punctuation, text in `text`
    End,
};

struct Token {
    Tok kind;
    std::string text;
    int line;
    int col;
};

class Lexer {
  public:
    Lexer(const std::string& src, bool hash_comments)
        : src_(src), hash_(hash_comments) {
        tokenize();
    }

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    Token next() {
        const Token& t = peek();
        if (t.kind != Tok::End)
            ++pos_;
        return t;
    }
    bool at_end() const { return peek().kind == Tok::End; }

    std::size_t save() const { return pos_; }
    void restore(std::size_t pos) { pos_ = pos; }

    bool accept(const std::string& punct) {
        if (peek().kind == Tok::Punct && peek().text == punct) {
            ++pos_;
            return true;
        }
        return false;
    }
    bool accept_kw(const std::string& word) {
        if (peek().kind == Tok::Ident && peek().text == word) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(const std::string& punct) {
        if (!accept(punct))
            fail("expected '" + punct + "', got '" + peek().text + "'");
    }
    void expect_kw(const std::string& word) {
        if (!accept_kw(word))
            fail("expected '" + word + "', got '" + peek().text + "'");
    }
    std::string expect_ident() {
        if (peek().kind != Tok::Ident)
            fail("expected identifier, got '" + peek().text + "'");
        return next().text;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, peek().line, peek().col);
    }

  private:
    void tokenize() {
        int line = 1, col = 1;
        std::size_t i = 0;
        auto advance = [&](std::size_t n) {
            for (std::size_t k = 0; k < n; ++k) {
                if (src_[i + k] == '\n') {
                    ++line;
                    col = 1;
                } else {
                    ++col;
                }
            }
            i += n;
        };
        while (i < src_.size()) {
            char c = src_[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance(1);
                continue;
            }
            if (hash_ && c == '#') {
                while (i < src_.size() && src_[i] != '\n')
                    advance(1);
                continue;
            }
            if (!hash_ && c == '/' && i + 1 < src_.size() && src_[i + 1] == '/') {
                while (i < src_.size() && src_[i] != '\n')
                    advance(1);
                continue;
            }
            if (!hash_ && c == '/' && i + 1 < src_.size() && src_[i + 1] == '*') {
                advance(2);
                while (i + 1 < src_.size() && !(src_[i] == '*' && src_[i + 1] == '/'))
                    advance(1);
                if (i + 1 >= src_.size())
                    throw ParseError("unterminated comment", line, col);
                advance(2);
                continue;
            }
            int tl = line, tc = col;
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t j = i;
                while (j < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
                    ++j;
                toks_.push_back({Tok::Ident, src_.substr(i, j - i), tl, tc});
                advance(j - i);
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                std::size_t j = i;
                while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j])))
                    ++j;
                toks_.push_back({Tok::Int, src_.substr(i, j - i), tl, tc});
                advance(j - i);
                continue;
            }
            static const char* two[] = {":=", "->", "<=", ">=", "==", "!=",
                                        "&&", "||", "++", "--", "+=", "-="};
            bool matched = false;
            for (auto* op : two) {
                if (src_.compare(i, 2, op) == 0) {
                    toks_.push_back({Tok::Punct, op, tl, tc});
                    advance(2);
                    matched = true;
                    break;
                }
            }
            if (matched)
                continue;
            static const std::string singles = ";,:(){}[]+-*^=<>!";
            if (singles.find(c) != std::string::npos) {
                toks_.push_back({Tok::Punct, std::string(1, c), tl, tc});
                advance(1);
                continue;
            }
            throw ParseError(std::string("unexpected character '") + c + "'", line, col);
        }
        toks_.push_back({Tok::End, "<eof>", line, col});
    }

    std::string src_;
    bool hash_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

// Polynomial expression grammar shared by both formats:
//   expr   := ['-'] term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := atom ['^' int]
//   atom   := integer | identifier | '(' expr ')'
class ExprParser {
  public:
    explicit ExprParser(Lexer& lx) : lx_(lx) {}

    Polynomial expr() {
        bool neg = lx_.accept("-");
        Polynomial p = term();
        if (neg)
            p = -p;
        for (;;) {
            if (lx_.accept("+"))
                p += term();
            else if (lx_.accept("-"))
                p -= term();
            else
                return p;
        }
    }

  private:
    Polynomial term() {
        Polynomial p = factor();
        while (lx_.accept("*"))
            p = p * factor();
        return p;
    }
    Polynomial factor() {
        Polynomial p = atom();
        if (lx_.accept("^")) {
            if (lx_.peek().kind != Tok::Int)
                lx_.fail("expected integer exponent");
            long e = std::stol(lx_.next().text);
            if (e < 0)
                lx_.fail("negative exponent");
            Polynomial r(1);
            for (long k = 0; k < e; ++k)
                r = r * p;
            return r;
        }
        return p;
    }
    Polynomial atom() {
        if (lx_.accept("-"))
            return -atom();
        if (lx_.peek().kind == Tok::Int) {
            mpz_class n(lx_.next().text, 10);
            return Polynomial(Rational(n));
        }
        if (lx_.peek().kind == Tok::Ident) {
            std::string name = lx_.next().text;
            if (lx_.peek().kind == Tok::Punct && lx_.peek().text == "(")
                lx_.fail("function calls are not supported (inline them); '" + name + "('");
            if (lx_.peek().kind == Tok::Punct && lx_.peek().text == "[")
                lx_.fail("arrays are not supported; '" + name + "['");
            return Polynomial::var(name);
        }
        if (lx_.accept("(")) {
            Polynomial p = expr();
            lx_.expect(")");
            return p;
        }
        lx_.fail("expected expression, got '" + lx_.peek().text + "'");
    }

    Lexer& lx_;
};

// Normalizes `lhs cmp rhs` over integers into >=0 conjuncts.
//   a <  b  ->  b - a - 1 >= 0        a >  b  ->  a - b - 1 >= 0
//   a <= b  ->  b - a     >= 0        a >= b  ->  a - b     >= 0
//   a == b  ->  both a - b >= 0 and b - a >= 0
// `!=` is disjunctive and rejected here.
inline std::vector<Polynomial> normalize_cmp(const Polynomial& lhs, const std::string& op,
                                             const Polynomial& rhs) {
    if (op == "<")
        return {rhs - lhs - Polynomial(1)};
    if (op == "<=")
        return {rhs - lhs};
    if (op == ">")
        return {lhs - rhs - Polynomial(1)};
    if (op == ">=")
        return {lhs - rhs};
    if (op == "==")
        return {lhs - rhs, rhs - lhs};
    throw std::invalid_argument("normalize_cmp: unsupported comparison " + op);
}

inline AffineExpr to_affine_or_fail(Lexer& lx, const Polynomial& p, const char* what) {
    if (p.degree() > 1)
        lx.fail(std::string(what) +
                " must be affine (rewrite non-affine expressions through a dummy variable): " +
                p.str());
    return AffineExpr(p);
}

// Comma-separated list of comparisons, normalized into >=0 conjuncts.
inline Assertion parse_conjunction(Lexer& lx, const char* what) {
    Assertion a;
    for (;;) {
        Polynomial lhs = ExprParser(lx).expr();
        if (lx.peek().kind != Tok::Punct)
            lx.fail("expected comparison operator");
        std::string op = lx.peek().text;
        if (op == "!=")
            lx.fail("'!=' is disjunctive and not allowed in a conjunction");
        if (op != "<" && op != "<=" && op != ">" && op != ">=" && op != "==")
            lx.fail("expected comparison operator, got '" + op + "'");
        lx.next();
        Polynomial rhs = ExprParser(lx).expr();
        for (auto& p : normalize_cmp(lhs, op, rhs))
            a.conjuncts.push_back(to_affine_or_fail(lx, p, what));
        if (!lx.accept(","))
            break;
    }
    return a;
}

} // namespace diffcost::detail
