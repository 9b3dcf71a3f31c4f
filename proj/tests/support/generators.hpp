#pragma once

// Seeded random generators for the randomised suites: small metric programs
// for the mode-agreement and instance-accounting runs, consistency instances
// for the verdict cross-checks, and ground store/formula pairs for the
// pointwise evaluator comparison.
//
// All randomness flows through explicit modulo arithmetic over
// std::mt19937_64 output, so a given seed produces the same instance on
// every platform and standard library.

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "../testutil.hpp"
#include "dmtl/ast.hpp"
#include "dmtl/store.hpp"
#include "dmtl/symbols.hpp"

namespace gen {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }
    bool pct(unsigned p) { return below(100) < p; }
    bool coin() { return below(2) == 0; }

    template <typename T>
    const T& pick(const std::vector<T>& xs) {
        return xs[below(xs.size())];
    }

private:
    std::mt19937_64 eng_;
};

namespace detail {

inline const std::vector<std::string> kUnaryOps{"DIAMONDMINUS", "DIAMONDPLUS", "BOXMINUS",
                                                "BOXPLUS"};
inline const std::vector<std::string> kBinaryOps{"SINCE", "UNTIL"};
inline const std::vector<std::string> kHeadBoxes{"BOXMINUS", "BOXPLUS"};

// A syntactically valid bounded range over the given ascending endpoint
// spellings; retries bracket draws that would denote the empty set.
inline std::string boundedRange(Rng& rng, const std::vector<std::string>& eps) {
    for (;;) {
        std::size_t i = rng.below(eps.size());
        std::size_t j = rng.below(eps.size());
        if (i > j) std::swap(i, j);
        bool loClosed = rng.coin();
        bool hiClosed = rng.coin();
        if (i == j && !(loClosed && hiClosed)) continue;
        std::string s(1, loClosed ? '[' : '(');
        s += eps[i];
        s += ',';
        s += eps[j];
        s += hiClosed ? ']' : ')';
        return s;
    }
}

}  // namespace detail

// Program/dataset pairs for the materialisation-mode agreement, the
// semi-naive instance accounting, and the rule-drop safety runs. Shape:
// one to four rules over unary predicates P0..P2 with the single variable X;
// the first body conjunct is a plain relational atom (so every rule is safe
// by construction) and matches the head predicate 70% of the time, which
// keeps the corpus rich in directly recursive rules; zero to two further
// conjuncts draw uniformly over all six metric operators. Range and fact
// endpoints come from {0, 1/2, 1, 2}; one to eight bounded facts over
// constants c0, c1. Half of the programs additionally get a strictly
// advancing self-propagation rule anchored to a populated predicate (so the
// typical run iterates for several steps instead of reaching its fixpoint
// immediately), and 70% get a plain copy rule whose source predicate holds
// in the dataset: its instances go stale as soon as the source stabilises,
// which is exactly the work the semi-naive delta is meant to skip while
// naive re-derives it every step.
inline testutil::Instance corpusInstance(std::uint64_t seed) {
    Rng rng(seed);
    static const std::vector<std::string> preds{"P0", "P1", "P2"};
    static const std::vector<std::string> consts{"c0", "c1"};
    static const std::vector<std::string> eps{"0", "1/2", "1", "2"};

    // Facts first: the propagation rule below is only useful if its
    // predicate actually holds somewhere.
    std::string data;
    std::vector<std::string> factPreds;
    std::size_t facts = 1 + rng.below(8);
    for (std::size_t f = 0; f < facts; ++f) {
        const std::string& p = rng.pick(preds);
        factPreds.push_back(p);
        data += p + "(" + rng.pick(consts) + ")@" + detail::boundedRange(rng, eps) + "\n";
    }

    std::string prog;
    std::size_t rules = 1 + rng.below(4);
    for (std::size_t r = 0; r < rules; ++r) {
        const std::string& headPred = rng.pick(preds);
        std::string line;
        if (rng.pct(20))
            line += rng.pick(detail::kHeadBoxes) + detail::boundedRange(rng, eps) + " ";
        line += headPred + "(X) <- ";
        line += (rng.pct(70) ? headPred : rng.pick(preds)) + "(X)";
        std::size_t extras = rng.below(3);
        for (std::size_t e = 0; e < extras; ++e) {
            line += " AND ";
            if (rng.pct(30)) {
                line += rng.pick(preds) + "(X) " + rng.pick(detail::kBinaryOps) +
                        detail::boundedRange(rng, eps) + " " + rng.pick(preds) + "(X)";
            } else {
                line += rng.pick(detail::kUnaryOps) + detail::boundedRange(rng, eps) + " " +
                        rng.pick(preds) + "(X)";
            }
        }
        prog += line + "\n";
    }

    std::string driven;
    if (rng.pct(50)) {
        // A diamond range whose upper endpoint is positive shifts coverage a
        // little further every step, so the rule never stops deriving within
        // the step budgets used by the randomised suites.
        std::size_t j = 1 + rng.below(eps.size() - 1);
        std::size_t i = rng.below(j + 1);
        bool loClosed = rng.coin();
        bool hiClosed = rng.coin();
        if (i == j) loClosed = hiClosed = true;
        driven = rng.pick(factPreds);
        prog += driven + "(X) <- " + (rng.coin() ? "DIAMONDMINUS" : "DIAMONDPLUS") +
                (loClosed ? "[" : "(") + eps[i] + "," + eps[j] + (hiClosed ? "]" : ")") + " " +
                driven + "(X)\n";
    }
    if (rng.pct(70)) {
        // The copy rule prefers a source the propagation rule is not growing,
        // so its instances actually stabilise.
        std::string src = rng.pick(factPreds);
        for (int tries = 0; tries < 4 && src == driven; ++tries) src = rng.pick(factPreds);
        std::string dst = rng.pick(preds);
        if (dst == src) {
            for (const std::string& p : preds) {
                if (p != src) {
                    dst = p;
                    break;
                }
            }
        }
        prog += dst + "(X) <- " + src + "(X)\n";
    }
    return testutil::parseInstance(prog, data);
}

// Instances for the consistency- and entailment-agreement runs. Kept small
// enough that the window automata stay well inside a 1e5-state budget:
// one to three rules over Q0..Q2 (integer range endpoints 0..2, facts on
// 0..3, constants a and b), a falsity rule with probability 0.7, and an
// unbounded closed-lower range on a unary body operator with probability
// 0.15 per conjunct draw.
inline testutil::Instance consistencyInstance(std::uint64_t seed) {
    Rng rng(seed);
    static const std::vector<std::string> preds{"Q0", "Q1", "Q2"};
    static const std::vector<std::string> consts{"a", "b"};
    static const std::vector<std::string> eps{"0", "1", "2"};
    static const std::vector<std::string> factEps{"0", "1", "2", "3"};

    auto conjunct = [&rng](bool allowUnbounded) {
        std::size_t form = rng.below(100);
        if (form < 20) return rng.pick(preds) + "(X)";
        if (form < 45) {
            return rng.pick(preds) + "(X) " + rng.pick(detail::kBinaryOps) +
                   detail::boundedRange(rng, eps) + " " + rng.pick(preds) + "(X)";
        }
        std::string range = (allowUnbounded && rng.pct(15))
                                ? "[" + rng.pick(eps) + ",inf)"
                                : detail::boundedRange(rng, eps);
        return rng.pick(detail::kUnaryOps) + range + " " + rng.pick(preds) + "(X)";
    };

    std::string prog;
    std::size_t rules = 1 + rng.below(3);
    for (std::size_t r = 0; r < rules; ++r) {
        const std::string& headPred = rng.pick(preds);
        std::string line;
        if (rng.pct(20))
            line += rng.pick(detail::kHeadBoxes) + detail::boundedRange(rng, eps) + " ";
        line += headPred + "(X) <- ";
        line += (rng.pct(60) ? headPred : rng.pick(preds)) + "(X)";
        if (rng.coin()) line += " AND " + conjunct(true);
        prog += line + "\n";
    }
    if (rng.pct(70)) {
        std::string line = "BOTTOM <- " + rng.pick(preds) + "(X)";
        if (rng.coin()) line += " AND " + conjunct(false);
        prog += line + "\n";
    }

    std::string data;
    std::size_t facts = 1 + rng.below(5);
    for (std::size_t f = 0; f < facts; ++f) {
        data += rng.pick(preds) + "(" + rng.pick(consts) + ")@" +
                detail::boundedRange(rng, factEps) + "\n";
    }
    return testutil::parseInstance(prog, data);
}

// A ground store plus a ground metric formula for the pointwise evaluator
// comparison. Store intervals use endpoints that are multiples of 1/2 in
// [0, 3]; formulas nest up to three operator levels over relational leaves,
// and an unbounded upper endpoint may appear only on the outermost operator
// (and only on a unary one), which keeps the sampling oracle's finite
// horizon exact.
struct EvalCase {
    dmtl::SymbolTable syms;
    dmtl::FactStore store;
    dmtl::AtomPtr atom;
};

namespace detail {

inline std::string formulaText(Rng& rng, int depth, bool root) {
    static const std::vector<std::string> preds{"Q0", "Q1", "Q2"};
    static const std::vector<std::string> eps{"0", "1/2", "1", "2"};
    if (depth == 0 || rng.pct(30)) return rng.pick(preds) + "(a)";
    if (rng.below(3) == 0) {
        return "(" + formulaText(rng, depth - 1, false) + ") " + rng.pick(kBinaryOps) +
               boundedRange(rng, eps) + " (" + formulaText(rng, depth - 1, false) + ")";
    }
    std::string range = (root && rng.pct(20))
                            ? std::string(rng.coin() ? "[" : "(") + rng.pick(eps) + ",inf)"
                            : boundedRange(rng, eps);
    return rng.pick(kUnaryOps) + range + " (" + formulaText(rng, depth - 1, false) + ")";
}

}  // namespace detail

inline EvalCase evalCase(std::uint64_t seed) {
    Rng rng(seed);
    static const std::vector<std::string> preds{"Q0", "Q1", "Q2"};
    static const std::vector<std::string> factEps{"0", "1/2", "1", "3/2", "2", "5/2", "3"};

    std::string data;
    std::size_t facts = 1 + rng.below(4);
    for (std::size_t f = 0; f < facts; ++f) {
        data += rng.pick(preds) + "(a)@" + detail::boundedRange(rng, factEps) + "\n";
    }
    int depth = 1 + static_cast<int>(rng.below(3));
    std::string prog = "H <- " + detail::formulaText(rng, depth, true) + "\n";

    testutil::Instance inst = testutil::parseInstance(prog, data);
    EvalCase out;
    out.atom = inst.program.rules[0].body[0];
    out.store = dmtl::FactStore::fromDataset(inst.dataset);
    out.syms = std::move(inst.syms);
    return out;
}

}  // namespace gen
