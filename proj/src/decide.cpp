#include "rbqa/decide.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace rbqa {

using json = nlohmann::json;

const char* to_string(Answer a) {
    switch (a) {
    case Answer::Answerable: return "answerable";
    case Answer::NotAnswerable: return "not-answerable";
    case Answer::Unknown: return "unknown";
    }
    return "?";
}

const char* to_string(Route r) {
    switch (r) {
    case Route::FdRoute: return "fd";
    case Route::IdExistenceRoute: return "id-existence-check";
    case Route::BoundedWidthRoute: return "id-bounded-width";
    case Route::UidFdSeparableRoute: return "uid-fd-separable";
    case Route::FgTgdChoiceRoute: return "choice-tgd";
    }
    return "?";
}

const char* to_string(FiniteVariant f) {
    return f == FiniteVariant::SameAsUnrestricted ? "same-as-unrestricted" : "not-supported";
}

json Verdict::to_json() const {
    json out;
    out["verdict"] = to_string(answer);
    out["class"] = to_string(cls, width);
    out["route"] = to_string(route);
    out["method"] = method;
    out["budget"] = {{"max_rounds", budget.max_rounds},
                     {"max_facts", budget.max_facts},
                     {"max_depth", budget.max_depth}};
    if (witness) {
        json assignment = json::object();
        for (const auto& [var, value] : witness->assignment)
            assignment[symbol_text(var)] = value.to_string();
        json facts = json::array();
        for (const auto& f : witness->matched_facts) facts.push_back(f.to_string());
        out["witness"] = {{"assignment", assignment}, {"facts", facts}};
    } else {
        out["witness"] = nullptr;
    }
    out["finite_variant"] = to_string(finite_variant);
    out["timings"] = {{"total_ms", elapsed_ms}};
    out["stats"] = {{"rounds", stats.rounds},
                    {"tgd_firings", stats.tgd_firings},
                    {"fd_firings", stats.fd_firings},
                    {"merges", stats.merges},
                    {"max_depth_seen", stats.max_depth_seen}};
    out["notes"] = notes;
    return out;
}

namespace {

Witness make_witness(const ContainmentProblem& p, const ChaseState& state,
                     const Assignment& assignment) {
    Witness w;
    w.assignment = assignment;
    for (const auto& atom : p.target.atoms) {
        Tuple t;
        for (const auto& term : atom.terms)
            t.push_back(term.is_var() ? assignment.at(term.sym) : Value::constant(term.sym));
        w.matched_facts.push_back(Fact{atom.rel, std::move(t)});
    }
    (void)state;
    return w;
}

// Runs the (budgeted) chase for an executable containment problem and maps
// the outcome onto a verdict. Saturation is a definitive no.
void run_containment_chase(Verdict& v, const ContainmentProblem& p, const Budget& budget,
                           bool terminating) {
    if (!p.executable())
        throw DecideError("NonExecutableGamma",
                          "symbolic counting axioms must be simplified away before chasing");
    if (p.seed_unsatisfiable)
        throw DecideError("FdConstantConflict",
                          "the FDs force two distinct constants of the query to be equal");
    Budget b = budget;
    if (terminating) {
        // Termination is structural here; only the fact budget applies.
        b.max_rounds = Budget::unlimited().max_rounds;
        b.max_depth = Budget::unlimited().max_depth;
    }
    auto deps = p.chase_deps();
    Assignment match;
    auto hook = [&](const ChaseState& state) {
        Assignment hom;
        if (p.target_matches(state, &hom)) {
            match = hom;
            return true;
        }
        return false;
    };
    auto result = chase_to_fixpoint(p.initial, deps, b, p.policy, hook);
    v.stats = result.stats;
    switch (result.outcome) {
    case ChaseOutcome::StoppedEarly:
        v.answer = Answer::Answerable;
        v.witness = make_witness(p, result.state, match);
        v.final_instance = result.state.instance();
        break;
    case ChaseOutcome::Saturated:
        v.answer = Answer::NotAnswerable;
        v.final_instance = result.state.instance();
        break;
    case ChaseOutcome::BudgetExhausted:
        v.answer = Answer::Unknown;
        v.notes.push_back("chase budget exhausted before a fixpoint");
        break;
    case ChaseOutcome::FdConflict:
        throw DecideError("FdConstantConflict",
                          "the FDs force two distinct constants of the query to be equal");
    }
}

} // namespace

Verdict fd_route(const ConjunctiveQuery& q, const Schema& s, const Budget& budget) {
    Verdict v;
    v.route = Route::FdRoute;
    v.method = "fd-simplification + terminating chase";
    v.budget = budget;

    auto [simplified, report] = fd_simplify(s);
    auto p = build_amondet_containment(q, simplified);

    // Prunings: the unprimed view-to-relation rules never fire (view facts
    // always come from a base fact), and primed relation-to-view facts are
    // dead ends.
    std::set<Symbol> views;
    for (const auto& [view, info] : report.views) views.insert(view);
    std::erase_if(p.gamma, [&](const GammaRule& rule) {
        const auto* t = std::get_if<Tgd>(&rule.dep);
        if (!t || !t->is_id()) return false;
        Symbol body = t->body.front().rel;
        Symbol head = t->head.front().rel;
        if (rule.kind == AxiomKind::SigmaOriginal && views.count(body)) return true;
        for (Symbol view : views)
            if (rule.kind == AxiomKind::SigmaPrimed && head == primed(view)) return true;
        return false;
    });
    v.notes.push_back("pruned " + std::to_string(views.size() * 2) +
                      " never-firing view rules");

    // Merge the seed under the FDs up front; afterwards no FD should fire.
    if (!apply_fds_to_initial(p, fds_of(s.constraints)))
        throw DecideError("FdConstantConflict",
                          "the FDs force two distinct constants of the query to be equal");
    run_containment_chase(v, p, budget, /*terminating=*/true);
    if (v.stats.fd_firings > 0)
        v.notes.push_back("unexpected FD firing after seed minimization");
    return v;
}

Verdict bounded_width_route(const ConjunctiveQuery& q, const Schema& s, int width,
                            const Budget& budget) {
    Verdict v;
    v.route = Route::BoundedWidthRoute;
    v.method = "existence-check + linearized semi-width decision";
    v.budget = budget;

    auto [simplified, report] = existence_check_simplify(s);
    auto p = normalize_existence_check_gamma(
        split_accessibility_axioms(build_amondet_containment(q, simplified)), report);
    auto lp = linearize_problem(p, width);
    auto decision = decide_containment_semiwidth(lp, budget);
    v.stats = decision.stats;
    v.notes.push_back("depth bound " + std::to_string(decision.depth_bound));
    if (decision.budget_exceeded) {
        v.answer = Answer::Unknown;
        v.notes.push_back("fact budget exceeded during linearized materialization");
        return v;
    }
    if (decision.holds) {
        v.answer = Answer::Answerable;
        Witness w;
        w.assignment = *decision.witness;
        for (const auto& atom : lp.target.atoms) {
            Tuple t;
            for (const auto& term : atom.terms)
                t.push_back(term.is_var() ? decision.witness->at(term.sym)
                                          : Value::constant(term.sym));
            w.matched_facts.push_back(Fact{atom.rel, std::move(t)});
        }
        v.witness = std::move(w);
    } else {
        v.answer = Answer::NotAnswerable;
    }
    return v;
}

Verdict id_budgeted_route(const ConjunctiveQuery& q, const Schema& s, const Budget& budget) {
    Verdict v;
    v.route = Route::IdExistenceRoute;
    v.method = "existence-check + budgeted chase";
    v.budget = budget;
    auto [simplified, report] = existence_check_simplify(s);
    auto p = normalize_existence_check_gamma(
        split_accessibility_axioms(build_amondet_containment(q, simplified)), report);
    run_containment_chase(v, p, budget, /*terminating=*/false);
    return v;
}

Verdict uidfd_route(const ConjunctiveQuery& q, const Schema& s, const Budget& budget) {
    Verdict v;
    v.route = Route::UidFdSeparableRoute;
    v.method = "choice-simplification + separable rewrite + budgeted chase";
    v.budget = budget;
    Schema choice = choice_simplify(s);
    auto p = uidfd_separable_rewrite(build_amondet_containment(q, choice),
                                     fds_of(s.constraints));
    run_containment_chase(v, p, budget, /*terminating=*/false);
    return v;
}

Verdict choice_route(const ConjunctiveQuery& q, const Schema& s, const Budget& budget) {
    Verdict v;
    v.route = Route::FgTgdChoiceRoute;
    v.method = "choice-simplification + budgeted chase";
    v.budget = budget;
    Schema choice = choice_simplify(s);
    auto p = build_amondet_containment(q, choice);
    run_containment_chase(v, p, budget, /*terminating=*/false);
    return v;
}

Verdict decide_monotone_answerability(const ConjunctiveQuery& q, const Schema& s,
                                      const Budget& budget, const DecideOptions& opts) {
    auto start = std::chrono::steady_clock::now();
    auto diags = validate_schema(s);
    if (!diags.empty())
        throw DecideError("InvalidSchema", diags.front().to_string());
    check_query(q, s.signature);

    Schema lowered = elim_ub(s);
    auto profile = classify(lowered.constraints);

    Verdict v;
    switch (profile.cls) {
    case ConstraintClass::FdOnly:
        v = fd_route(q, lowered, budget);
        break;
    case ConstraintClass::IdOnly:
        if (profile.width <= opts.w_max)
            v = bounded_width_route(q, lowered, std::max(profile.width, 1), budget);
        else
            v = id_budgeted_route(q, lowered, budget);
        break;
    case ConstraintClass::UidFd:
        v = uidfd_route(q, lowered, budget);
        break;
    case ConstraintClass::Mixed:
        v = choice_route(q, lowered, budget);
        v.notes.push_back("FDs mixed with non-unary IDs: falling back to the budgeted "
                          "choice-simplified chase");
        break;
    case ConstraintClass::FrontierGuarded:
    case ConstraintClass::GeneralTgd:
        v = choice_route(q, lowered, budget);
        break;
    }
    v.cls = profile.cls;
    v.width = profile.width;
    switch (profile.cls) {
    case ConstraintClass::FdOnly:
    case ConstraintClass::IdOnly:
    case ConstraintClass::FrontierGuarded:
        v.finite_variant = FiniteVariant::SameAsUnrestricted;
        break;
    default:
        v.finite_variant = FiniteVariant::NotSupported;
        break;
    }
    v.elapsed_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    return v;
}

std::string explain(const Verdict& v) {
    std::ostringstream out;
    out << "verdict: " << to_string(v.answer) << "\n";
    out << "class:   " << to_string(v.cls, v.width) << "\n";
    out << "route:   " << to_string(v.route) << " (" << v.method << ")\n";
    out << "finite variant: " << to_string(v.finite_variant) << "\n";
    out << "chase:   " << v.stats.rounds << " rounds, " << v.stats.tgd_firings
        << " tgd firings, " << v.stats.fd_firings << " fd firings, " << v.stats.merges
        << " merges, max depth " << v.stats.max_depth_seen << "\n";
    if (v.witness) {
        out << "match:\n";
        for (const auto& [var, value] : v.witness->assignment)
            out << "  " << symbol_text(var) << " -> " << value.to_string() << "\n";
        for (const auto& f : v.witness->matched_facts) out << "  uses " << f.to_string() << "\n";
    }
    for (const auto& note : v.notes) out << "note: " << note << "\n";
    return out.str();
}

} // namespace rbqa
