#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "evplan/error.hpp"

namespace evplan {

/// Parenthesized expression with source positions. `;` starts a line comment.
struct SExpr {
    bool is_list = false;
    std::string atom;
    std::vector<SExpr> items;
    SourceLoc loc;

    bool is_atom() const { return !is_list; }
    bool is_atom(std::string_view text) const { return !is_list && atom == text; }
    /// True for a list whose first item is the atom `head`.
    bool has_head(std::string_view head) const {
        return is_list && !items.empty() && items.front().is_atom(head);
    }
};

/// Reads all top-level expressions. Throws SyntaxError on unbalanced input.
std::vector<SExpr> read_sexprs(std::string_view text);

}  // namespace evplan
