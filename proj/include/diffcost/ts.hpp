// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "diffcost/poly.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace diffcost {

struct SemanticError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Nondeterministic assignment, optionally range-restricted by affine bounds
/// evaluated in the pre-state.
struct NondetUpdate {
    std::optional<AffineExpr> lower;
    std::optional<AffineExpr> upper;
    bool operator==(const NondetUpdate& o) const {
        return lower == o.lower && upper == o.upper;
    }
};

/// Simultaneous update of all variables: each variable maps to either a
/// polynomial over the pre-state or a nondeterministic choice. Variables
/// without an explicit entry are unchanged.
class Update {
  public:
    using Entry = std::variant<Polynomial, NondetUpdate>;

    static Update identity() { return Update(); }

    void set(const std::string& var, Polynomial p) { entries_[var] = std::move(p); }
    void set_nondet(const std::string& var, NondetUpdate nd = {}) { entries_[var] = std::move(nd); }

    bool is_identity() const;
    bool updates(const std::string& var) const { return entries_.count(var) != 0; }
    /// Entry for var, materializing the identity Deterministic(var).
    Entry entry(const std::string& var) const {
        auto it = entries_.find(var);
        if (it != entries_.end())
            return it->second;
        return Polynomial::var(var);
    }
    const std::map<std::string, Entry>& entries() const { return entries_; }

    bool is_deterministic() const {
        for (auto& [v, e] : entries_)
            if (std::holds_alternative<NondetUpdate>(e))
                return false;
        return true;
    }

    /// Variables read by some deterministic right-hand side or nondet bound.
    std::set<std::string> reads() const;

    /// Sequential composition: apply *this first, then `then`. Fails if a
    /// right-hand side of `then` reads a variable this update sets
    /// nondeterministically (the correlation is not expressible).
    Update and_then(const Update& then) const;

    bool operator==(const Update& o) const { return entries_ == o.entries_; }

    std::string str() const;

  private:
    std::map<std::string, Entry> entries_;
};

struct Transition {
    std::string source;
    std::string target;
    Assertion guard;   // conjunction of affine exprs >= 0
    Update update;
    std::string id;    // "t<index>", assigned by the owning system

    bool operator==(const Transition& o) const {
        return source == o.source && target == o.target && guard == o.guard &&
               update == o.update;
    }
};

/// Program model: locations, affine-guarded transitions with polynomial or
/// nondeterministic updates, an initial assertion Theta0 entailing cost = 0,
/// and a terminal location whose only outgoing transition is an identity
/// self-loop.
struct TransitionSystem {
    std::vector<std::string> variables; // ordered, includes "cost"
    std::vector<std::string> locations;
    std::vector<Transition> transitions;
    std::string initial;
    std::string terminal;
    Assertion theta0;
    std::string name; // optional tag for reports

    bool has_location(const std::string& l) const;
    bool has_variable(const std::string& v) const;
    std::vector<const Transition*> outgoing(const std::string& loc) const;

    /// True if the variable is written by some non-identity update entry or
    /// nondeterministically. Theta0 conjuncts over never-written variables
    /// stay valid at every location.
    bool is_written(const std::string& var) const;

    /// Assigns transition ids t0..tN in list order.
    void assign_ids();

    /// Checks every structural invariant; throws SemanticError naming the
    /// violated one.
    void validate() const;

    /// Structural equality up to transition order.
    bool same_structure(const TransitionSystem& o) const;
};

/// Renders in the line-oriented `.ts` format; parseable back to an equal
/// structure.
std::string print_ts(const TransitionSystem& ts);

inline const std::string kCostVar = "cost";

} // namespace diffcost
