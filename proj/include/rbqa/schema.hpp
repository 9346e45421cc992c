#pragma once

#include "rbqa/constraints.hpp"

#include <nlohmann/json.hpp>

namespace rbqa {

enum class BoundKind { None, ResultBound, ResultLowerBound };

struct AccessMethod {
    Symbol name;
    Symbol relation;
    std::vector<int> inputs; // 1-based positions, sorted
    BoundKind bound_kind = BoundKind::None;
    long bound = 0;

    bool bounded() const { return bound_kind != BoundKind::None; }
    std::vector<int> outputs(int arity) const;
    auto operator<=>(const AccessMethod&) const = default;
};

struct Schema {
    Signature signature;
    std::vector<Dependency> constraints;
    std::vector<AccessMethod> methods;

    const AccessMethod* method(Symbol name) const;
    std::vector<Fd> fds() const { return fds_of(constraints); }
    std::vector<Tgd> tgds() const { return tgds_of(constraints); }
};

struct SourceSpan {
    int line = 0;
    int column = 0;
};

struct Diagnostic {
    std::string code;
    std::string message;
    std::optional<SourceSpan> span;
    std::string to_string() const;
};

// Empty result means the schema is well-formed: methods and constraints only
// reference declared relations, positions are in range, names are unique,
// bounds are >= 1, constraints contain no constants, and atoms declared as
// IDs have no repeated variables.
std::vector<Diagnostic> validate_schema(const Schema& s);

// Every ResultBound(k) becomes ResultLowerBound(k); nothing else changes.
Schema elim_ub(Schema s);

// Every bound becomes 1, keeping its kind.
Schema choice_simplify(Schema s);

enum class SimplKind { ExistenceCheck, FdSimplify, Choice, ElimUB };

struct ViewInfo {
    Symbol base;                     // relation the view projects
    Symbol method;                   // originating result-bounded method
    std::vector<int> base_positions; // base positions covered, in view order
    std::vector<int> view_inputs;    // view positions that are method inputs
};

struct SimplificationReport {
    SimplKind kind;
    std::vector<std::pair<Symbol, int>> new_relations;
    std::vector<Dependency> new_constraints;
    std::map<Symbol, Symbol> method_map; // old method -> replacement
    std::map<Symbol, ViewInfo> views;    // view relation -> provenance
    nlohmann::json to_json() const;
};

// Replaces each result-bounded method mt on R by a Boolean method on a view
// R_mt over the input positions, linked to R by two inclusion dependencies.
std::pair<Schema, SimplificationReport> existence_check_simplify(const Schema& s);

// Like the existence check, but the view covers DetBy(inputs) under the FD
// closure and the replacement method keeps the input positions.
std::pair<Schema, SimplificationReport> fd_simplify(const Schema& s);

Symbol view_relation_name(Symbol relation, Symbol method);
Symbol primed(Symbol rel);

} // namespace rbqa
