#pragma once

#include "dmtl/interval.hpp"
#include "dmtl/symbols.hpp"

#include <cassert>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

namespace dmtl {

struct Term {
    bool isVar = false;
    SymbolId sym = 0;

    friend bool operator==(const Term&, const Term&) = default;
    friend auto operator<=>(const Term&, const Term&) = default;
};

struct RelAtom {
    SymbolId pred = 0;
    std::vector<Term> args;

    bool isGround() const {
        for (const Term& t : args)
            if (t.isVar) return false;
        return true;
    }
    friend bool operator==(const RelAtom&, const RelAtom&) = default;
};

enum class Op {
    Top,
    Bottom,
    Rel,
    DiamondMinus,
    DiamondPlus,
    BoxMinus,
    BoxPlus,
    Since,
    Until,
};

struct MetricAtom;
using AtomPtr = std::shared_ptr<const MetricAtom>;

// Immutable metric-atom tree. Unary operators use child `a`; since/until use
// `a` for the continuity operand and `b` for the witness operand.
struct MetricAtom {
    Op op = Op::Rel;
    RelAtom rel;
    std::optional<Interval> range;
    AtomPtr a;
    AtomPtr b;

    static AtomPtr top() { return std::make_shared<MetricAtom>(MetricAtom{Op::Top, {}, {}, nullptr, nullptr}); }
    static AtomPtr bottom() { return std::make_shared<MetricAtom>(MetricAtom{Op::Bottom, {}, {}, nullptr, nullptr}); }
    static AtomPtr relational(RelAtom r) {
        return std::make_shared<MetricAtom>(MetricAtom{Op::Rel, std::move(r), {}, nullptr, nullptr});
    }
    static AtomPtr unary(Op op, Interval range, AtomPtr sub) {
        assert(op == Op::DiamondMinus || op == Op::DiamondPlus || op == Op::BoxMinus ||
               op == Op::BoxPlus);
        return std::make_shared<MetricAtom>(
            MetricAtom{op, {}, std::move(range), std::move(sub), nullptr});
    }
    static AtomPtr binary(Op op, Interval range, AtomPtr left, AtomPtr right) {
        assert(op == Op::Since || op == Op::Until);
        return std::make_shared<MetricAtom>(
            MetricAtom{op, {}, std::move(range), std::move(left), std::move(right)});
    }

    bool isUnaryOp() const {
        return op == Op::DiamondMinus || op == Op::DiamondPlus || op == Op::BoxMinus ||
               op == Op::BoxPlus;
    }
    bool isBinaryOp() const { return op == Op::Since || op == Op::Until; }
};

struct Rule {
    AtomPtr head;
    std::vector<AtomPtr> body;
    int line = 0;

    bool isBottomRule() const { return head->op == Op::Bottom; }

    // The relational atom at the core of the head (below any box operators).
    const RelAtom* headRel() const {
        const MetricAtom* m = head.get();
        while (m && m->isUnaryOp()) m = m->a.get();
        return (m && m->op == Op::Rel) ? &m->rel : nullptr;
    }
};

struct Program {
    std::vector<Rule> rules;
};

struct Fact {
    RelAtom atom; // ground
    Interval interval = Interval::point(Rational(0));

    friend bool operator==(const Fact&, const Fact&) = default;
};

struct Dataset {
    std::vector<Fact> facts;
};

// --- traversal helpers ---

inline void forEachRelLeaf(const MetricAtom& atom, const std::function<void(const RelAtom&)>& fn) {
    switch (atom.op) {
        case Op::Rel: fn(atom.rel); return;
        case Op::Top:
        case Op::Bottom: return;
        case Op::Since:
        case Op::Until:
            forEachRelLeaf(*atom.a, fn);
            forEachRelLeaf(*atom.b, fn);
            return;
        default: forEachRelLeaf(*atom.a, fn); return;
    }
}

inline void collectVars(const MetricAtom& atom, std::set<SymbolId>& out) {
    forEachRelLeaf(atom, [&](const RelAtom& r) {
        for (const Term& t : r.args)
            if (t.isVar) out.insert(t.sym);
    });
}

inline void collectPredicates(const MetricAtom& atom, std::set<SymbolId>& out) {
    forEachRelLeaf(atom, [&](const RelAtom& r) { out.insert(r.pred); });
}

inline bool isGroundAtom(const MetricAtom& atom) {
    bool ground = true;
    forEachRelLeaf(atom, [&](const RelAtom& r) { ground = ground && r.isGround(); });
    return ground;
}

using Substitution = std::unordered_map<SymbolId, SymbolId>; // variable -> constant

inline RelAtom substitute(const RelAtom& r, const Substitution& sigma) {
    RelAtom out{r.pred, r.args};
    for (Term& t : out.args) {
        if (!t.isVar) continue;
        auto it = sigma.find(t.sym);
        if (it != sigma.end()) t = Term{false, it->second};
    }
    return out;
}

inline AtomPtr substitute(const AtomPtr& atom, const Substitution& sigma) {
    switch (atom->op) {
        case Op::Top:
        case Op::Bottom: return atom;
        case Op::Rel: return MetricAtom::relational(substitute(atom->rel, sigma));
        case Op::Since:
        case Op::Until:
            return MetricAtom::binary(atom->op, *atom->range, substitute(atom->a, sigma),
                                      substitute(atom->b, sigma));
        default:
            return MetricAtom::unary(atom->op, *atom->range, substitute(atom->a, sigma));
    }
}

// --- printing (canonical concrete syntax, re-parseable) ---

std::string printTerm(const SymbolTable& syms, const Term& t);
std::string printRelAtom(const SymbolTable& syms, const RelAtom& r);
std::string printAtom(const SymbolTable& syms, const MetricAtom& atom);
std::string printRule(const SymbolTable& syms, const Rule& rule);
std::string printProgram(const SymbolTable& syms, const Program& program);
std::string printFact(const SymbolTable& syms, const Fact& fact);
std::string printDataset(const SymbolTable& syms, const Dataset& dataset);

} // namespace dmtl
