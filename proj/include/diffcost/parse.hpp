// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "diffcost/ts.hpp"

#include <stdexcept>
#include <string>

namespace diffcost {

struct ParseError : std::runtime_error {
    int line;
    int col;
    ParseError(const std::string& msg, int line_, int col_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " +
                             std::to_string(col_) + ")"),
          line(line_), col(col_) {}
};

/// Parses the line-oriented `.ts` transition-system format. The terminal
/// self-loop may be omitted in the file; it is added if missing. The result
/// is validated.
TransitionSystem parse_transition_system(const std::string& text);

/// Parses the `.imp` mini-language and lowers it to a transition system with
/// one location per loop head, branch point and statement-block boundary.
/// The `assume` clause becomes Theta0; `cost` is implicit. The result is
/// validated.
TransitionSystem parse_program(const std::string& text);

/// Dispatches on filename extension (.ts / .imp) and reads the file.
TransitionSystem parse_file(const std::string& path);

/// Parses a polynomial arithmetic expression (for symbolic bounds on the
/// command line).
Polynomial parse_polynomial(const std::string& text);

} // namespace diffcost
