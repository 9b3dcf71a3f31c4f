#include "dmtl/ast.hpp"

#include <cctype>

namespace dmtl {

namespace {

const char* opName(Op op) {
    switch (op) {
        case Op::DiamondMinus: return "DIAMONDMINUS";
        case Op::DiamondPlus: return "DIAMONDPLUS";
        case Op::BoxMinus: return "BOXMINUS";
        case Op::BoxPlus: return "BOXPLUS";
        case Op::Since: return "SINCE";
        case Op::Until: return "UNTIL";
        default: return "";
    }
}

bool bareConstant(const std::string& name) {
    if (name.empty()) return false;
    bool digits = true;
    for (char c : name)
        if (!std::isdigit(static_cast<unsigned char>(c))) digits = false;
    if (digits) return true;
    if (!(std::islower(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
    for (char c : name) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    }
    return true;
}

std::string quoteConstant(const std::string& name) {
    std::string out = "\"";
    for (char c : name) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

std::string printTerm(const SymbolTable& syms, const Term& t) {
    const std::string& n = syms.name(t.sym);
    if (t.isVar) return n;
    return bareConstant(n) ? n : quoteConstant(n);
}

std::string printRelAtom(const SymbolTable& syms, const RelAtom& r) {
    std::string out = syms.name(r.pred);
    if (!r.args.empty()) {
        out += '(';
        for (std::size_t i = 0; i < r.args.size(); ++i) {
            if (i) out += ',';
            out += printTerm(syms, r.args[i]);
        }
        out += ')';
    }
    return out;
}

std::string printAtom(const SymbolTable& syms, const MetricAtom& atom) {
    auto operand = [&](const MetricAtom& m) {
        std::string s = printAtom(syms, m);
        return m.isBinaryOp() ? "(" + s + ")" : s;
    };
    switch (atom.op) {
        case Op::Top: return "TOP";
        case Op::Bottom: return "BOTTOM";
        case Op::Rel: return printRelAtom(syms, atom.rel);
        case Op::Since:
        case Op::Until:
            return operand(*atom.a) + " " + opName(atom.op) + atom.range->str() + " " +
                   operand(*atom.b);
        default:
            return std::string(opName(atom.op)) + atom.range->str() + " " + operand(*atom.a);
    }
}

std::string printRule(const SymbolTable& syms, const Rule& rule) {
    std::string out = printAtom(syms, *rule.head) + " <- ";
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
        if (i) out += " AND ";
        out += printAtom(syms, *rule.body[i]);
    }
    return out;
}

std::string printProgram(const SymbolTable& syms, const Program& program) {
    std::string out;
    for (const Rule& r : program.rules) {
        out += printRule(syms, r);
        out += '\n';
    }
    return out;
}

std::string printFact(const SymbolTable& syms, const Fact& fact) {
    return printRelAtom(syms, fact.atom) + "@" + fact.interval.str();
}

std::string printDataset(const SymbolTable& syms, const Dataset& dataset) {
    std::string out;
    for (const Fact& f : dataset.facts) {
        out += printFact(syms, f);
        out += '\n';
    }
    return out;
}

} // namespace dmtl
