#pragma once

#include "rbqa/linearize.hpp"

namespace rbqa {

enum class Answer { Answerable, NotAnswerable, Unknown };

enum class Route {
    FdRoute,
    IdExistenceRoute,    // existence-check pipeline, budgeted chase
    BoundedWidthRoute,   // existence-check pipeline, exact linearized decision
    UidFdSeparableRoute,
    FgTgdChoiceRoute,
};

enum class FiniteVariant { SameAsUnrestricted, NotSupported };

struct DecideError : std::runtime_error {
    std::string code;
    DecideError(std::string c, const std::string& msg)
        : std::runtime_error(msg), code(std::move(c)) {}
};

struct Witness {
    Assignment assignment;        // target-query match, frozen vars pinned
    std::vector<Fact> matched_facts;
};

struct Verdict {
    Answer answer = Answer::Unknown;
    ConstraintClass cls = ConstraintClass::IdOnly;
    int width = 0;
    Route route = Route::FgTgdChoiceRoute;
    std::string method; // which decision procedure produced the answer
    std::optional<Witness> witness;
    FiniteVariant finite_variant = FiniteVariant::NotSupported;
    ChaseStats stats;
    Budget budget;
    double elapsed_ms = 0.0;
    std::vector<std::string> notes;
    std::optional<Instance> final_instance; // state the witness matches into

    nlohmann::json to_json() const;
};

struct DecideOptions {
    // Widest ID class decided exactly through linearization; the subscripted
    // signature grows as arity^(w+1).
    int w_max = 3;
};

const char* to_string(Answer a);
const char* to_string(Route r);
const char* to_string(FiniteVariant f);

// Classifies the (already validated) schema, picks the decision route, runs
// it, and reports the verdict. Unknown only arises on budgeted routes; a
// truncated chase never claims NotAnswerable.
Verdict decide_monotone_answerability(const ConjunctiveQuery& q, const Schema& s,
                                      const Budget& budget, const DecideOptions& opts = {});

// Route entry points, exposed for cross-checking one route against another.
Verdict fd_route(const ConjunctiveQuery& q, const Schema& elim_ubbed, const Budget& budget);
Verdict bounded_width_route(const ConjunctiveQuery& q, const Schema& elim_ubbed, int width,
                            const Budget& budget);
Verdict id_budgeted_route(const ConjunctiveQuery& q, const Schema& elim_ubbed,
                          const Budget& budget);
Verdict uidfd_route(const ConjunctiveQuery& q, const Schema& elim_ubbed, const Budget& budget);
Verdict choice_route(const ConjunctiveQuery& q, const Schema& elim_ubbed, const Budget& budget);

// Human-readable account of a verdict: simplification used, gamma size,
// chase statistics, and the match for answerable outcomes.
std::string explain(const Verdict& v);

} // namespace rbqa
