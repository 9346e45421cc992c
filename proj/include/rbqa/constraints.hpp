#pragma once

#include "rbqa/model.hpp"

#include <span>
#include <variant>

namespace rbqa {

// Constraint atoms carry variables only; constants inside dependencies are
// rejected at validation time.
struct TgdAtom {
    Symbol rel;
    std::vector<Symbol> vars;
    auto operator<=>(const TgdAtom&) const = default;
    std::string to_string() const;
};

struct Tgd {
    std::vector<TgdAtom> body;
    std::vector<TgdAtom> head;

    std::set<Symbol> body_vars() const;
    std::set<Symbol> head_vars() const;
    std::set<Symbol> exported_vars() const;
    int width() const { return static_cast<int>(exported_vars().size()); }

    bool is_full() const;
    bool is_id() const;
    bool is_uid() const { return is_id() && width() <= 1; }
    bool is_guarded() const;
    bool is_frontier_guarded() const;

    std::string to_string() const;
    auto operator<=>(const Tgd&) const = default;
};

// Functional dependency D -> j on a single relation; positions are 1-based.
struct Fd {
    Symbol rel;
    std::vector<int> determinant; // sorted, duplicate-free
    int determined;
    std::string to_string() const;
    auto operator<=>(const Fd&) const = default;
};

using Dependency = std::variant<Tgd, Fd>;

std::string dependency_to_string(const Dependency& d);

enum class ConstraintClass { FdOnly, IdOnly, UidFd, FrontierGuarded, GeneralTgd, Mixed };

std::string to_string(ConstraintClass cls, int width);

struct DependencyFlags {
    bool is_id = false;
    bool is_uid = false;
    bool is_full = false;
    bool is_guarded = false;
    bool is_frontier_guarded = false;
    int width = 0;
};

struct ConstraintProfile {
    std::vector<DependencyFlags> flags;
    int width = 0; // max exported-variable count over IDs
    ConstraintClass cls = ConstraintClass::IdOnly;
};

// Purely syntactic classification. The set-level class is the most specific
// label; an empty set classifies as IdOnly with width 0.
ConstraintProfile classify(std::span<const Dependency> deps);

// Positions of `rel` determined by P under the FD closure (Armstrong-style
// fixpoint over the FDs on this relation). Always a superset of P.
std::set<int> detby(std::span<const Fd> fds, Symbol rel, const std::set<int>& base);

struct MinimizedQuery {
    ConjunctiveQuery query;
    // Representative term for each original free variable; a constant here
    // means the FDs pin the output position to that constant.
    std::map<Symbol, Term> head_terms;
    bool unsatisfiable = false; // two distinct constants forced equal
};

// Chase the canonical database of q with the FDs to a fixpoint and read the
// merged instance back as a query. Atom and variable counts never grow.
MinimizedQuery minimize_query_under_fds(const ConjunctiveQuery& q, std::span<const Fd> fds,
                                        const Signature& sig);

std::vector<Fd> fds_of(std::span<const Dependency> deps);
std::vector<Tgd> tgds_of(std::span<const Dependency> deps);

} // namespace rbqa
