#pragma once

#include "rbqa/chase.hpp"
#include "rbqa/schema.hpp"

namespace rbqa {

// Symbolic lower-bound axiom for thresholds >= 2: "if at least j tuples of R
// match the accessible binding, at least j are selected". Never chased; the
// decision routes simplify bounds away before they would be needed.
struct CountingAxiom {
    Symbol relation;
    std::vector<int> inputs;
    long threshold; // 2 <= threshold <= bound of the method
    Symbol method;
    std::string to_string() const;
    auto operator<=>(const CountingAxiom&) const = default;
};

enum class AxiomKind {
    SigmaOriginal,
    SigmaPrimed,
    NoBoundRewritten,          // acc(x) & R(x,y) -> R'(x,y) & acc(y)
    LowerBoundOne,             // acc(x) & R(x,y) -> exists z. R_acc(x,z)
    AccToBoth,                 // R_acc(w) -> R(w) & R'(w) & acc(w)
    TruncatedAccessibility,    // acc-on-P & R(x) -> acc(x_j)
    Transfer,                  // acc(x) & R(x,y) -> R'(x,y)
    ResultBoundedFactTransfer, // acc(x) & R(x,y) -> exists z. R'(x,z)
};

const char* to_string(AxiomKind kind);

struct GammaRule {
    Dependency dep;
    AxiomKind kind;
    std::optional<Symbol> method; // originating access method, when any
};

// The query-containment problem deciding access monotonic-determinacy:
// source Q against target Q' (Q with every relation primed) under gamma.
struct ContainmentProblem {
    ConjunctiveQuery source;
    ConjunctiveQuery target;
    std::vector<GammaRule> gamma;
    std::vector<CountingAxiom> counting;
    Instance initial; // canonical database of Q plus accessibility seeds
    Signature base_signature;
    Signature extended;
    std::vector<AccessMethod> methods;
    ChasePolicy policy;
    bool seed_unsatisfiable = false; // FDs forced two distinct constants equal
    // Seed-level merges (from applying FDs to the initial instance) can move a
    // frozen free variable onto another value; the target match starts there.
    std::map<Symbol, Value> frozen_base;

    bool executable() const { return counting.empty(); }
    std::vector<Dependency> chase_deps() const;
    // Frozen free variables the target match must hit, canonicalized in `state`.
    Assignment target_fixed(const ChaseState& state) const;
    bool target_matches(const ChaseState& state, Assignment* witness = nullptr) const;
};

struct ReductionError : std::runtime_error {
    std::string code;
    ReductionError(std::string c, const std::string& msg)
        : std::runtime_error(msg), code(std::move(c)) {}
};

// Gamma = Sigma + Sigma' + accessibility axioms; initial = CanonDB(Q) plus
// accessible(c) for each constant of Q. Result bounds must already be lower
// bounds (elim_ub); thresholds >= 2 surface as symbolic counting axioms.
ContainmentProblem build_amondet_containment(const ConjunctiveQuery& q, const Schema& s);

// Splits each combined no-bound axiom into one Transfer axiom plus one
// single-head truncated accessibility axiom per output position.
ContainmentProblem split_accessibility_axioms(ContainmentProblem p);

// For a problem built over an existence-check simplified schema: drops the
// view scaffolding and replaces it by one Result-bounded Fact Transfer axiom
// per bounded method. The transfer keeps the accessibility premise on the
// method's input positions; without it the rewrite would claim primed facts
// for tuples whose binding is never obtainable.
ContainmentProblem normalize_existence_check_gamma(ContainmentProblem p,
                                                   const SimplificationReport& report);

// Separability rewrite for UIDs + FDs: inlines the bound-1 axioms, exports
// all positions determined by the method inputs, drops the FDs from gamma
// after applying them to the initial instance, and requires primed UIDs to
// fire last.
ContainmentProblem uidfd_separable_rewrite(ContainmentProblem p, std::span<const Fd> fds);

// Chases the initial instance with the FDs to a fixpoint (value merging) and
// records where frozen free variables land. Returns false when two distinct
// constants are forced equal; the problem is marked unsatisfiable.
bool apply_fds_to_initial(ContainmentProblem& p, std::span<const Fd> fds);

ConjunctiveQuery prime_query(const ConjunctiveQuery& q);
Symbol accessible_relation();

} // namespace rbqa
