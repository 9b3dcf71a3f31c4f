#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dmtl {

using SymbolId = std::uint32_t;

// Interns predicate, constant and variable names. Predicate arities are fixed
// by first use and enforced on every later occurrence (programs and datasets
// share one table so they agree on both ids and arities).
class SymbolTable {
public:
    SymbolId intern(std::string_view name) {
        auto it = ids_.find(std::string(name));
        if (it != ids_.end()) return it->second;
        SymbolId id = static_cast<SymbolId>(names_.size());
        names_.emplace_back(name);
        ids_.emplace(names_.back(), id);
        return id;
    }

    std::optional<SymbolId> lookup(std::string_view name) const {
        auto it = ids_.find(std::string(name));
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& name(SymbolId id) const { return names_.at(id); }
    std::size_t size() const { return names_.size(); }

    std::optional<std::uint32_t> arityOf(SymbolId pred) const {
        auto it = arity_.find(pred);
        if (it == arity_.end()) return std::nullopt;
        return it->second;
    }

    // Returns false when pred was already used with a different arity.
    bool fixArity(SymbolId pred, std::uint32_t arity) {
        auto [it, inserted] = arity_.emplace(pred, arity);
        return inserted || it->second == arity;
    }

    // A fresh name based on `stem` that is not interned yet.
    SymbolId fresh(std::string_view stem) {
        std::string candidate(stem);
        int n = 0;
        while (ids_.count(candidate)) {
            candidate = std::string(stem) + "_" + std::to_string(n++);
        }
        return intern(candidate);
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, SymbolId> ids_;
    std::unordered_map<SymbolId, std::uint32_t> arity_;
};

} // namespace dmtl
