#pragma once

#include "dmtl/ast.hpp"
#include "dmtl/symbols.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace dmtl {

class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, int line, int col, std::string_view file = "")
        : std::runtime_error(format(message, line, col, file)),
          message_(std::move(message)),
          line_(line),
          col_(col) {}

    const std::string& message() const { return message_; }
    int line() const { return line_; }
    int col() const { return col_; }

private:
    static std::string format(const std::string& msg, int line, int col, std::string_view file) {
        std::string out;
        if (!file.empty()) {
            out += file;
            out += ':';
        }
        out += std::to_string(line) + ":" + std::to_string(col) + ": " + msg;
        return out;
    }

    std::string message_;
    int line_;
    int col_;
};

// One rule or fact per line, '#' starts a comment. The symbol table is shared
// between program and dataset parses so predicate ids and arities line up.
//
// Rules:   HEAD <- ATOM AND ATOM ...
//   head  := BOTTOM | P(s) | BOXMINUS[r] head | BOXPLUS[r] head
//   atom  := unary ((SINCE|UNT IL)[r] unary)*        (left associative)
//   unary := TOP | BOTTOM | P(s) | prefix-op [r] unary | ( atom )
// Facts:   P(c,...)@[lo,hi]
//
// Rejected with positioned diagnostics: arity drift, unsafe head variables,
// vacuously true bodies, malformed or negative operator ranges, non-ground
// facts, empty fact intervals.
class Parser {
public:
    explicit Parser(SymbolTable& syms) : syms_(syms) {}

    Program parseProgram(std::string_view text, std::string_view file = "");
    Dataset parseDataset(std::string_view text, std::string_view file = "");
    // A single "P(c,...)@[lo,hi]" with nothing after it.
    Fact parseFact(std::string_view text);

private:
    SymbolTable& syms_;
};

} // namespace dmtl
