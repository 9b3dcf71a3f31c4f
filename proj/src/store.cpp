#include "dmtl/store.hpp"

#include <algorithm>

namespace dmtl {

FactStore::AtomId FactStore::internAtom(const GroundAtom& atom) {
    auto it = index_.find(atom);
    if (it != index_.end()) return it->second;
    AtomId id = static_cast<AtomId>(entries_.size());
    entries_.push_back(Entry{atom, {}});
    index_.emplace(atom, id);
    byPred_[atom.pred].push_back(id);
    for (std::size_t pos = 0; pos < atom.args.size(); ++pos) {
        byArg_[argKey(atom.pred, pos, atom.args[pos])].push_back(id);
        constants_.insert(atom.args[pos]);
    }
    ++generation_;
    return id;
}

std::optional<FactStore::AtomId> FactStore::findAtom(const GroundAtom& atom) const {
    auto it = index_.find(atom);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool FactStore::insertCoalescing(const GroundAtom& atom, const Interval& iv) {
    return insertCoalescing(internAtom(atom), iv);
}

bool FactStore::insertCoalescing(AtomId id, const Interval& iv) {
    auto outcome = entries_[id].ivs.insertCoalescing(iv);
    if (!outcome.added) return false;
    ++generation_;
    for (Interval& piece : outcome.newPieces) {
        newPieces_.push_back(NewPiece{id, piece});
    }
    return true;
}

bool FactStore::entails(const GroundAtom& atom, const Interval& iv) const {
    auto id = findAtom(atom);
    return id && entries_[*id].ivs.entails(iv);
}

std::size_t FactStore::intervalCount() const {
    std::size_t n = 0;
    for (const Entry& e : entries_) n += e.ivs.size();
    return n;
}

const std::vector<FactStore::AtomId>& FactStore::atomsOfPred(SymbolId pred) const {
    static const std::vector<AtomId> empty;
    auto it = byPred_.find(pred);
    return it == byPred_.end() ? empty : it->second;
}

void FactStore::matchPattern(SymbolId pred, std::span<const std::optional<SymbolId>> pattern,
                             std::vector<AtomId>& out) const {
    // Start from the smallest index bucket among the bound positions.
    const std::vector<AtomId>* bucket = nullptr;
    for (std::size_t pos = 0; pos < pattern.size(); ++pos) {
        if (!pattern[pos]) continue;
        auto it = byArg_.find(argKey(pred, pos, *pattern[pos]));
        if (it == byArg_.end()) return; // no atom has this constant here
        if (!bucket || it->second.size() < bucket->size()) bucket = &it->second;
    }
    if (!bucket) bucket = &atomsOfPred(pred);
    for (AtomId id : *bucket) {
        const GroundAtom& a = entries_[id].key;
        if (a.args.size() != pattern.size()) continue;
        bool ok = true;
        for (std::size_t pos = 0; pos < pattern.size() && ok; ++pos) {
            ok = !pattern[pos] || a.args[pos] == *pattern[pos];
        }
        if (ok) out.push_back(id);
    }
}

void FactStore::matchAtom(const RelAtom& pattern, const Substitution& sigma,
                          const std::function<void(const Substitution&, AtomId)>& yield) const {
    std::vector<std::optional<SymbolId>> bound(pattern.args.size());
    for (std::size_t i = 0; i < pattern.args.size(); ++i) {
        const Term& t = pattern.args[i];
        if (!t.isVar) {
            bound[i] = t.sym;
        } else if (auto it = sigma.find(t.sym); it != sigma.end()) {
            bound[i] = it->second;
        }
    }
    std::vector<AtomId> ids;
    matchPattern(pattern.pred, bound, ids);
    for (AtomId id : ids) {
        const GroundAtom& a = entries_[id].key;
        Substitution extended = sigma;
        bool ok = true;
        for (std::size_t i = 0; i < pattern.args.size() && ok; ++i) {
            if (bound[i]) continue; // checked by matchPattern
            auto [it, fresh] = extended.emplace(pattern.args[i].sym, a.args[i]);
            ok = fresh || it->second == a.args[i];
        }
        if (ok) yield(extended, id);
    }
}

void FactStore::subtractExact(AtomId id, const Interval& piece) {
    entries_[id].ivs.subtract(piece);
    ++generation_;
}

std::string FactStore::dump(const SymbolTable& syms) const {
    // Atom-major: atoms sorted by their printed form, each atom's intervals in
    // stored (left-endpoint) order. Sorting whole lines instead would let an
    // interval like [10,...] jump before [2,...] textually.
    std::vector<std::pair<std::string, const Entry*>> atoms;
    atoms.reserve(entries_.size());
    for (const Entry& e : entries_) {
        if (e.ivs.empty()) continue;
        atoms.emplace_back(printRelAtom(syms, toRelAtom(e.key)), &e);
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string out;
    for (const auto& [name, e] : atoms) {
        for (const Interval& iv : e->ivs) {
            out += name;
            out += '@';
            out += iv.str();
            out += '\n';
        }
    }
    return out;
}

FactStore FactStore::fromDataset(const Dataset& data) {
    FactStore store;
    for (const Fact& f : data.facts) {
        store.insertCoalescing(toGroundAtom(f.atom), f.interval);
    }
    return store;
}

Dataset FactStore::toDataset() const {
    Dataset out;
    for (const Entry& e : entries_) {
        for (const Interval& iv : e.ivs) {
            out.facts.push_back(Fact{toRelAtom(e.key), iv});
        }
    }
    return out;
}

} // namespace dmtl
