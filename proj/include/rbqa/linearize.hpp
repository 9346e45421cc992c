#pragma once

#include "rbqa/reduction.hpp"

namespace rbqa {

// Encodes the axiom  acc(x_p for p in positions) & R(x) -> acc(x_target).
struct AccTriple {
    Symbol rel;
    std::vector<int> positions; // sorted, |positions| <= w
    int target;
    auto operator<=>(const AccTriple&) const = default;
    std::string to_string() const;
};

struct LinearizeError : std::runtime_error {
    std::string code;
    LinearizeError(std::string c, const std::string& msg)
        : std::runtime_error(msg), code(std::move(c)) {}
};

// Least fixpoint of the trivial triples under the inclusion-dependency,
// transitivity and access rules. Only unbounded methods contribute accesses;
// a bounded method reveals existence, not values.
std::vector<AccTriple> saturate_truncated_axioms(std::span<const Tgd> ids,
                                                 std::span<const AccessMethod> methods,
                                                 const Signature& relations, int width);

// Subscripted relation R_P over the same arity as R.
Symbol lin_relation_name(Symbol rel, const std::vector<int>& positions);

struct LinRules {
    std::vector<GammaRule> rules; // Lift + Transfer + Result-bounded Fact Transfer
    Signature lin_signature;      // base relations plus every R_P
};

// The inclusion dependencies over the subscripted signature that simulate the
// chase with the IDs and the accessibility axioms.
LinRules build_sigma_lin(std::span<const Tgd> ids, std::span<const AccessMethod> methods,
                         const std::vector<AccTriple>& triples, const Signature& relations,
                         int width);

// Closes the seed's accessibility under the derived axioms, then subscripts
// every fact with each accessible subset of size <= w. Fully accessible facts
// transfer outright; facts whose bounded-method inputs are accessible get a
// primed image with fresh outputs.
Instance build_i0_lin(const Instance& i0, std::span<const AccessMethod> methods,
                      const std::vector<AccTriple>& triples, const Signature& relations,
                      int width);

struct SemiWidthDecomposition {
    std::vector<Tgd> sigma1; // width <= w
    std::vector<Tgd> sigma2; // acyclic position graph
};

// Splits the IDs into a width-bounded part and an acyclic part; nullopt when
// the leftover position graph has a cycle.
std::optional<SemiWidthDecomposition> semiwidth_decompose(std::span<const Tgd> ids, int width);

struct LinearizedProblem {
    std::vector<GammaRule> rules; // sigma-lin plus the primed original IDs
    Instance initial;
    ConjunctiveQuery target;
    std::map<Symbol, Value> frozen_base;
    Signature lin_signature;
    int width = 0;
    std::vector<AccTriple> triples;
};

// Assembles the linearized containment problem from a normalized
// existence-check gamma (Sigma + Sigma' + Transfer + Truncated Accessibility
// + Result-bounded Fact Transfer).
LinearizedProblem linearize_problem(const ContainmentProblem& normalized, int width);

struct LinDecision {
    bool holds = false;
    bool budget_exceeded = false; // fact budget; depth exhaustion is exact
    std::optional<Assignment> witness;
    ChaseStats stats;
    long depth_bound = 0;
};

// Complete decision for semi-width-bounded inputs: a breadth-first restricted
// chase to the tight-match depth bound, checking the target after each round.
// A chase that saturates or exhausts the depth without a match is a definitive
// "no"; only the fact budget yields an indefinite answer.
LinDecision decide_containment_semiwidth(const LinearizedProblem& p, const Budget& budget);

} // namespace rbqa
