#pragma once

#include "dmtl/ast.hpp"
#include "dmtl/interval.hpp"
#include "dmtl/symbols.hpp"

#include <boost/functional/hash.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dmtl {

struct GroundAtom {
    SymbolId pred = 0;
    std::vector<SymbolId> args;

    friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
};

struct GroundAtomHash {
    std::size_t operator()(const GroundAtom& a) const {
        std::size_t h = boost::hash<SymbolId>{}(a.pred);
        boost::hash_range(h, a.args.begin(), a.args.end());
        return h;
    }
};

inline GroundAtom toGroundAtom(const RelAtom& rel) {
    GroundAtom out{rel.pred, {}};
    out.args.reserve(rel.args.size());
    for (const Term& t : rel.args) out.args.push_back(t.sym);
    return out;
}

inline RelAtom toRelAtom(const GroundAtom& g) {
    RelAtom out{g.pred, {}};
    out.args.reserve(g.args.size());
    for (SymbolId c : g.args) out.args.push_back(Term{false, c});
    return out;
}

// Ground relational facts with their maximal-interval truth sets, indexed by
// predicate and by (predicate, position, constant). Insertions coalesce and
// record exactly the newly covered sub-intervals since the last beginStep();
// that log is what the semi-naive delta and the halt rollback are built from.
class FactStore {
public:
    using AtomId = std::uint32_t;

    struct NewPiece {
        AtomId atom;
        Interval piece;
    };

    AtomId internAtom(const GroundAtom& atom);
    std::optional<AtomId> findAtom(const GroundAtom& atom) const;

    // Returns true when some part of iv was not already covered.
    bool insertCoalescing(const GroundAtom& atom, const Interval& iv);
    bool insertCoalescing(AtomId id, const Interval& iv);

    bool entails(const GroundAtom& atom, const Interval& iv) const;
    const IntervalSeq& intervals(AtomId id) const { return entries_[id].ivs; }
    const GroundAtom& atom(AtomId id) const { return entries_[id].key; }

    std::size_t atomCount() const { return entries_.size(); }
    std::size_t intervalCount() const;

    const std::vector<AtomId>& atomsOfPred(SymbolId pred) const;
    // pattern[i] bound => args[i] must equal it. Appends matches to out.
    void matchPattern(SymbolId pred, std::span<const std::optional<SymbolId>> pattern,
                      std::vector<AtomId>& out) const;
    // Unifies a (possibly non-ground) atom against the stored atoms under a
    // partial substitution; repeated variables must agree. Yields each match
    // with the substitution extended by the variables the match binds.
    void matchAtom(const RelAtom& pattern, const Substitution& sigma,
                   const std::function<void(const Substitution&, AtomId)>& yield) const;

    void beginStep() { newPieces_.clear(); }
    const std::vector<NewPiece>& newPieces() const { return newPieces_; }
    bool anyNewPieces() const { return !newPieces_.empty(); }

    // Removes exactly this sub-interval (used to roll the final step back).
    void subtractExact(AtomId id, const Interval& piece);

    const std::set<SymbolId>& constants() const { return constants_; }
    std::uint64_t generation() const { return generation_; }

    // Canonical dump: one fact per maximal interval, sorted by predicate
    // name, argument names, then interval order. Equal dumps <=> equal stores.
    std::string dump(const SymbolTable& syms) const;

    static FactStore fromDataset(const Dataset& data);
    Dataset toDataset() const;

private:
    struct Entry {
        GroundAtom key;
        IntervalSeq ivs;
    };

    static std::uint64_t argKey(SymbolId pred, std::size_t pos, SymbolId constant) {
        return (static_cast<std::uint64_t>(pred) << 40) ^
               (static_cast<std::uint64_t>(pos & 0xff) << 32) ^ constant;
    }

    std::vector<Entry> entries_;
    std::unordered_map<GroundAtom, AtomId, GroundAtomHash> index_;
    std::unordered_map<SymbolId, std::vector<AtomId>> byPred_;
    std::unordered_map<std::uint64_t, std::vector<AtomId>> byArg_;
    std::vector<NewPiece> newPieces_;
    std::set<SymbolId> constants_;
    std::uint64_t generation_ = 0;
};

} // namespace dmtl
