#pragma once

#include "rbqa/interner.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace rbqa {

struct ModelError : std::runtime_error {
    std::string code;
    ModelError(std::string c, const std::string& msg)
        : std::runtime_error(msg), code(std::move(c)) {}
};

// Domain elements. Constants carry their lexeme; nulls are numbered per run;
// frozen values stand for the free variables of a query turned into
// distinguished elements (they appear in canonical databases and everything
// chased from them).
enum class ValueKind : std::uint8_t { Constant, Null, Frozen };

class Value {
public:
    Value() : Value(ValueKind::Null, 0) {}
    static Value constant(Symbol label) { return Value(ValueKind::Constant, label); }
    static Value null(std::uint32_t id) { return Value(ValueKind::Null, id); }
    static Value frozen(Symbol var) { return Value(ValueKind::Frozen, var); }

    ValueKind kind() const { return static_cast<ValueKind>(code_ >> 30); }
    std::uint32_t id() const { return code_ & 0x3fffffffu; }

    bool is_constant() const { return kind() == ValueKind::Constant; }
    bool is_null() const { return kind() == ValueKind::Null; }
    bool is_frozen() const { return kind() == ValueKind::Frozen; }

    std::string to_string() const;

    auto operator<=>(const Value&) const = default;

private:
    Value(ValueKind k, std::uint32_t id)
        : code_((static_cast<std::uint32_t>(k) << 30) | (id & 0x3fffffffu)) {}
    std::uint32_t code_;
};

using Tuple = std::vector<Value>;

struct Fact {
    Symbol rel;
    Tuple tuple;
    auto operator<=>(const Fact&) const = default;
    std::string to_string() const;
};

struct Signature {
    // Declaration order is preserved; it drives deterministic printing.
    std::vector<std::pair<Symbol, int>> relations;

    bool has(Symbol rel) const;
    std::optional<int> arity(Symbol rel) const;
    void add(Symbol rel, int arity);
    bool operator==(const Signature&) const = default;
};

// A duplicate-free set of facts, indexed by relation and lazily by
// (position, value) to keep join candidate scans proportional to the match.
class Instance {
public:
    bool add(Fact f);
    bool contains(const Fact& f) const;
    const std::set<Tuple>& tuples(Symbol rel) const;
    const std::map<Symbol, std::set<Tuple>>& by_relation() const { return rels_; }
    // Tuples of rel whose 0-based position holds v; nullptr when none.
    const std::vector<Tuple>* tuples_with(Symbol rel, std::size_t pos, const Value& v) const;
    std::vector<Fact> all_facts() const;
    std::set<Value> active_domain() const;
    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }
    bool operator==(const Instance& other) const { return rels_ == other.rels_; }
    bool operator<(const Instance& other) const { return rels_ < other.rels_; }

private:
    struct PositionIndex {
        std::uint64_t version = 0;
        std::vector<std::map<Value, std::vector<Tuple>>> by_pos;
    };

    std::map<Symbol, std::set<Tuple>> rels_;
    std::size_t size_ = 0;
    std::map<Symbol, std::uint64_t> version_;
    mutable std::map<Symbol, PositionIndex> index_;
};

enum class TermKind : std::uint8_t { Var, Const };

struct Term {
    TermKind kind;
    Symbol sym;
    static Term var(Symbol v) { return Term{TermKind::Var, v}; }
    static Term constant(Symbol c) { return Term{TermKind::Const, c}; }
    bool is_var() const { return kind == TermKind::Var; }
    auto operator<=>(const Term&) const = default;
    std::string to_string() const;
};

struct QueryAtom {
    Symbol rel;
    std::vector<Term> terms;
    auto operator<=>(const QueryAtom&) const = default;
};

struct ConjunctiveQuery {
    Symbol name;
    std::vector<Symbol> free_vars;
    std::vector<QueryAtom> atoms;

    bool is_boolean() const { return free_vars.empty(); }
    std::set<Symbol> variables() const;
    std::set<Symbol> constants() const;
    std::string to_string() const;
    auto operator<=>(const ConjunctiveQuery&) const = default;
};

using Assignment = std::map<Symbol, Value>;

// Canonical database: one fact per atom, bound variables become nulls (numbered
// by first occurrence), free variables become frozen values, constants stay.
Instance canonical_db(const ConjunctiveQuery& q, const Signature& sig);

// Exhaustive backtracking search for a homomorphism extending `fixed`.
// Constants map to themselves; absence of a homomorphism returns nullopt.
std::optional<Assignment> find_homomorphism(const ConjunctiveQuery& q, const Instance& target,
                                            const Assignment& fixed = {});

// Calls `fn` for every homomorphism; stops early when fn returns false.
void for_each_homomorphism(const ConjunctiveQuery& q, const Instance& target,
                           const Assignment& fixed,
                           const std::function<bool(const Assignment&)>& fn);

// Output of q on inst: the free-variable projections of all matches. A Boolean
// query yields {()} when it holds and {} otherwise. The signature overload
// validates q first (UnknownRelation, ArityMismatch).
std::set<Tuple> eval_cq(const ConjunctiveQuery& q, const Instance& inst);
std::set<Tuple> eval_cq(const ConjunctiveQuery& q, const Instance& inst, const Signature& sig);

// Validation shared by canonical_db and eval_cq.
void check_query(const ConjunctiveQuery& q, const Signature& sig);

} // namespace rbqa
