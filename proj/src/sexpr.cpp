#include "evplan/sexpr.hpp"

#include <cctype>

namespace evplan {

std::vector<SExpr> read_sexprs(std::string_view text) {
    std::vector<SExpr> top;
    std::vector<SExpr> stack;
    int line = 1;
    int col = 1;
    size_t i = 0;
    auto advance = [&] {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++i;
    };
    auto emit = [&](SExpr e) {
        if (stack.empty()) {
            top.push_back(std::move(e));
        } else {
            stack.back().items.push_back(std::move(e));
        }
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == ';') {
            while (i < text.size() && text[i] != '\n') advance();
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance();
            continue;
        }
        SourceLoc loc{line, col};
        if (c == '(') {
            SExpr list;
            list.is_list = true;
            list.loc = loc;
            stack.push_back(std::move(list));
            advance();
            continue;
        }
        if (c == ')') {
            if (stack.empty()) throw SyntaxError(loc, "unexpected ')'");
            SExpr done = std::move(stack.back());
            stack.pop_back();
            advance();
            emit(std::move(done));
            continue;
        }
        SExpr atom;
        atom.loc = loc;
        while (i < text.size()) {
            char d = text[i];
            if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';') break;
            atom.atom.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(d))));
            advance();
        }
        emit(std::move(atom));
    }
    if (!stack.empty()) throw SyntaxError(stack.back().loc, "unclosed '('");
    return top;
}

}  // namespace evplan
