#include "dmtl/analysis.hpp"

#include <algorithm>
#include <functional>

namespace dmtl {

namespace {

// Virtual vertex for rule heads that are BOTTOM. Predicate ids are interned
// symbols, so the all-ones id can never collide.
constexpr SymbolId kFalsum = static_cast<SymbolId>(-1);

SymbolId headVertex(const Rule& rule) {
    const RelAtom* rel = rule.headRel();
    return rel ? rel->pred : kFalsum;
}

} // namespace

DependencyGraph::DependencyGraph(const Program& program) {
    for (const Rule& rule : program.rules) {
        SymbolId head = headVertex(rule);
        if (head != kFalsum) preds_.insert(head);
        adj_[head]; // ensure the vertex exists
        for (const AtomPtr& atom : rule.body) {
            std::set<SymbolId> bodyPreds;
            collectPredicates(*atom, bodyPreds);
            for (SymbolId p : bodyPreds) {
                preds_.insert(p);
                adj_[p].insert(head);
            }
        }
    }
}

const std::set<SymbolId>& DependencyGraph::successors(SymbolId p) const {
    static const std::set<SymbolId> empty;
    auto it = adj_.find(p);
    return it == adj_.end() ? empty : it->second;
}

std::set<SymbolId> DependencyGraph::cyclePredicates() const {
    // Iterative Tarjan; vertices in an SCC of size > 1 or with a self-loop
    // are the cyclic ones.
    std::map<SymbolId, int> index, low;
    std::vector<SymbolId> stack;
    std::set<SymbolId> onStack;
    std::set<SymbolId> cyclic;
    int counter = 0;

    struct Frame {
        SymbolId v;
        std::set<SymbolId>::const_iterator it, end;
    };

    for (const auto& [root, _] : adj_) {
        if (index.count(root)) continue;
        std::vector<Frame> frames;
        auto open = [&](SymbolId v) {
            index[v] = low[v] = counter++;
            stack.push_back(v);
            onStack.insert(v);
            const auto& next = successors(v);
            frames.push_back(Frame{v, next.begin(), next.end()});
        };
        open(root);
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.it != f.end) {
                SymbolId w = *f.it++;
                if (!index.count(w)) {
                    open(w);
                } else if (onStack.count(w)) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                SymbolId v = f.v;
                frames.pop_back();
                if (!frames.empty()) {
                    low[frames.back().v] = std::min(low[frames.back().v], low[v]);
                }
                if (low[v] == index[v]) {
                    std::vector<SymbolId> scc;
                    for (;;) {
                        SymbolId w = stack.back();
                        stack.pop_back();
                        onStack.erase(w);
                        scc.push_back(w);
                        if (w == v) break;
                    }
                    bool selfLoop = successors(v).count(v) != 0;
                    if (scc.size() > 1 || selfLoop) {
                        for (SymbolId w : scc) cyclic.insert(w);
                    }
                }
            }
        }
    }
    cyclic.erase(kFalsum);
    return cyclic;
}

PredicateClassification classifyPredicates(const Program& program) {
    DependencyGraph g(program);
    PredicateClassification out;
    out.mentioned = g.predicates();
    // A predicate is recursive when some dependency path reaching it traverses
    // a cycle: the cycle members themselves plus everything downstream.
    std::set<SymbolId> cyclic = g.cyclePredicates();
    std::vector<SymbolId> worklist(cyclic.begin(), cyclic.end());
    out.recursive = std::move(cyclic);
    while (!worklist.empty()) {
        SymbolId p = worklist.back();
        worklist.pop_back();
        for (SymbolId q : g.successors(p)) {
            if (q == kFalsum) continue;
            if (out.recursive.insert(q).second) worklist.push_back(q);
        }
    }
    return out;
}

bool atomNonRecursive(const MetricAtom& atom, const PredicateClassification& cls) {
    bool ok = true;
    forEachRelLeaf(atom, [&](const RelAtom& r) { ok = ok && !cls.isRecursive(r.pred); });
    return ok;
}

std::vector<std::size_t> relevantRules(const Program& program, SymbolId queryPred) {
    std::set<SymbolId> wanted{queryPred};
    std::vector<SymbolId> worklist{queryPred};
    std::vector<bool> included(program.rules.size(), false);

    auto includeRule = [&](std::size_t i) {
        if (included[i]) return;
        included[i] = true;
        for (const AtomPtr& atom : program.rules[i].body) {
            std::set<SymbolId> bodyPreds;
            collectPredicates(*atom, bodyPreds);
            for (SymbolId p : bodyPreds) {
                if (wanted.insert(p).second) worklist.push_back(p);
            }
        }
    };

    // Bottom-rules guard consistency for every query.
    for (std::size_t i = 0; i < program.rules.size(); ++i) {
        if (program.rules[i].isBottomRule()) includeRule(i);
    }
    while (!worklist.empty()) {
        SymbolId p = worklist.back();
        worklist.pop_back();
        for (std::size_t i = 0; i < program.rules.size(); ++i) {
            const RelAtom* rel = program.rules[i].headRel();
            if (rel && rel->pred == p) includeRule(i);
        }
    }

    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < program.rules.size(); ++i) {
        if (included[i]) out.push_back(i);
    }
    return out;
}

namespace {

enum Direction { Past = 1, Future = 2 };

// Direction of information flow for a BODY atom. A box in a body only reads
// values inside a bounded-offset region around the rule's evaluation point and
// shifts nothing across it, so it is direction-neutral; diamonds and the
// temporal halves of SINCE/UNTIL pull information from one side.
int bodyOpDirections(const MetricAtom& atom, bool& sawConstant) {
    switch (atom.op) {
        case Op::Top:
        case Op::Bottom: sawConstant = true; return 0;
        case Op::Rel: return 0;
        case Op::BoxMinus:
        case Op::BoxPlus: return bodyOpDirections(*atom.a, sawConstant);
        case Op::DiamondMinus: return Past | bodyOpDirections(*atom.a, sawConstant);
        case Op::DiamondPlus: return Future | bodyOpDirections(*atom.a, sawConstant);
        case Op::Since:
            return Past | bodyOpDirections(*atom.a, sawConstant) |
                   bodyOpDirections(*atom.b, sawConstant);
        case Op::Until:
            return Future | bodyOpDirections(*atom.a, sawConstant) |
                   bodyOpDirections(*atom.b, sawConstant);
    }
    return 0;
}

// Direction for a HEAD atom: a head box pushes the derived fact onto the
// corresponding side of the evaluation point. Head grammar admits only
// relational atoms, BOTTOM, and boxes.
int headOpDirections(const MetricAtom& atom, bool& sawConstant) {
    switch (atom.op) {
        case Op::Top:
        case Op::Bottom: sawConstant = true; return 0;
        case Op::Rel: return 0;
        case Op::BoxMinus: return Past | headOpDirections(*atom.a, sawConstant);
        case Op::BoxPlus: return Future | headOpDirections(*atom.a, sawConstant);
        default: sawConstant = true; return 0; // unreachable under the head grammar
    }
}

bool ruleCompatible(const Rule& rule, Direction bodyDir, Direction headDir) {
    bool sawConstant = false;
    int headOps = headOpDirections(*rule.head, sawConstant);
    int bodyOps = 0;
    for (const AtomPtr& atom : rule.body) bodyOps |= bodyOpDirections(*atom, sawConstant);
    if (sawConstant) return false;
    return (headOps & ~headDir) == 0 && (bodyOps & ~bodyDir) == 0;
}

} // namespace

bool ruleForwardCompatible(const Rule& rule) { return ruleCompatible(rule, Past, Future); }
bool ruleBackwardCompatible(const Rule& rule) { return ruleCompatible(rule, Future, Past); }

Propagation propagationClass(const std::vector<Rule>& rules) {
    bool fwd = true, bwd = true;
    for (const Rule& r : rules) {
        fwd = fwd && ruleForwardCompatible(r);
        bwd = bwd && ruleBackwardCompatible(r);
    }
    if (fwd) return Propagation::Forward;
    if (bwd) return Propagation::Backward;
    return Propagation::Mixed;
}

std::vector<Rule> groundRules(const Program& program, const std::set<SymbolId>& constants) {
    std::set<SymbolId> universe = constants;
    for (const Rule& rule : program.rules) {
        auto collectConsts = [&](const MetricAtom& atom) {
            forEachRelLeaf(atom, [&](const RelAtom& r) {
                for (const Term& t : r.args) {
                    if (!t.isVar) universe.insert(t.sym);
                }
            });
        };
        collectConsts(*rule.head);
        for (const AtomPtr& atom : rule.body) collectConsts(*atom);
    }

    std::vector<Rule> out;
    for (const Rule& rule : program.rules) {
        std::set<SymbolId> varSet;
        collectVars(*rule.head, varSet);
        for (const AtomPtr& atom : rule.body) collectVars(*atom, varSet);
        std::vector<SymbolId> vars(varSet.begin(), varSet.end());

        if (vars.empty()) {
            out.push_back(rule);
            continue;
        }
        std::vector<SymbolId> consts(universe.begin(), universe.end());
        if (consts.empty()) continue; // no ground instance exists

        std::vector<std::size_t> pick(vars.size(), 0);
        for (;;) {
            Substitution sigma;
            for (std::size_t i = 0; i < vars.size(); ++i) sigma[vars[i]] = consts[pick[i]];
            Rule ground;
            ground.head = substitute(rule.head, sigma);
            for (const AtomPtr& atom : rule.body) ground.body.push_back(substitute(atom, sigma));
            ground.line = rule.line;
            out.push_back(std::move(ground));

            std::size_t i = 0;
            while (i < pick.size() && ++pick[i] == consts.size()) pick[i++] = 0;
            if (i == pick.size()) break;
        }
    }
    return out;
}

} // namespace dmtl
