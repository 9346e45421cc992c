#include "rbqa/oracle.hpp"

#include <algorithm>

namespace rbqa {

const char* to_string(OracleAnswer a) {
    switch (a) {
    case OracleAnswer::Holds: return "holds";
    case OracleAnswer::FailsWithin: return "fails-within";
    case OracleAnswer::Unknown: return "unknown";
    }
    return "?";
}

OracleResult naive_containment(const ContainmentProblem& p, const Budget& budget) {
    if (!p.executable())
        throw ReductionError("NonExecutableGamma",
                             "the oracle cannot chase symbolic counting axioms");
    OracleResult result;
    if (p.seed_unsatisfiable) {
        result.answer = OracleAnswer::Unknown;
        result.outcome = ChaseOutcome::FdConflict;
        return result;
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
    auto chase = chase_to_fixpoint(p.initial, deps, budget, p.policy, hook);
    result.stats = chase.stats;
    result.outcome = chase.outcome;
    switch (chase.outcome) {
    case ChaseOutcome::StoppedEarly:
        result.answer = OracleAnswer::Holds;
        result.witness = match;
        break;
    case ChaseOutcome::Saturated:
        result.answer = OracleAnswer::FailsWithin;
        break;
    case ChaseOutcome::BudgetExhausted:
    case ChaseOutcome::FdConflict:
        result.answer = OracleAnswer::Unknown;
        break;
    }
    return result;
}

ContainmentProblem oracle_problem(const ConjunctiveQuery& q, const Schema& s) {
    return build_amondet_containment(q, elim_ub(choice_simplify(s)));
}

namespace {

std::string pool_constant(std::mt19937_64& rng) {
    return std::string("c") + std::to_string(1 + rng() % 2);
}

} // namespace

RandomCase CaseGenerator::next(ConstraintClass family) {
    RandomCase out;
    out.family = family;
    auto& rng = rng_;

    int relation_count = 1 + static_cast<int>(rng() % 3);
    std::vector<Symbol> rels;
    std::vector<int> arities;
    for (int i = 0; i < relation_count; ++i) {
        Symbol rel = intern("R" + std::to_string(i));
        int arity = 1 + static_cast<int>(rng() % 3);
        rels.push_back(rel);
        arities.push_back(arity);
        out.schema.signature.add(rel, arity);
    }
    auto random_rel = [&](int* arity_out) {
        int idx = static_cast<int>(rng() % rels.size());
        if (arity_out) *arity_out = arities[idx];
        return rels[idx];
    };

    // Constraints per family.
    bool want_fds =
        family == ConstraintClass::FdOnly || family == ConstraintClass::UidFd;
    bool want_ids =
        family == ConstraintClass::IdOnly || family == ConstraintClass::UidFd;
    if (want_fds) {
        int n = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < n; ++i) {
            int arity = 0;
            Symbol rel = random_rel(&arity);
            if (arity < 2) continue;
            int determined = 1 + static_cast<int>(rng() % arity);
            std::set<int> det;
            det.insert(1 + static_cast<int>(rng() % arity));
            if (rng() % 2) det.insert(1 + static_cast<int>(rng() % arity));
            det.erase(determined);
            if (det.empty()) continue;
            out.schema.constraints.push_back(
                Fd{rel, std::vector<int>(det.begin(), det.end()), determined});
        }
    }
    if (want_ids) {
        int max_width = family == ConstraintClass::UidFd ? 1 : 2;
        int n = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < n; ++i) {
            int body_arity = 0, head_arity = 0;
            Symbol body_rel = random_rel(&body_arity);
            Symbol head_rel = random_rel(&head_arity);
            int width = static_cast<int>(rng() % (std::min({max_width, body_arity, head_arity}) + 1));
            TgdAtom body{body_rel, {}};
            for (int p = 1; p <= body_arity; ++p) body.vars.push_back(intern("x" + std::to_string(p)));
            // Choose exported body positions and distinct head targets.
            std::vector<int> body_pos, head_pos;
            for (int p = 1; p <= body_arity; ++p) body_pos.push_back(p);
            for (int p = 1; p <= head_arity; ++p) head_pos.push_back(p);
            std::shuffle(body_pos.begin(), body_pos.end(), rng);
            std::shuffle(head_pos.begin(), head_pos.end(), rng);
            TgdAtom head{head_rel, {}};
            for (int p = 1; p <= head_arity; ++p) head.vars.push_back(intern("y" + std::to_string(p)));
            for (int wi = 0; wi < width; ++wi)
                head.vars[head_pos[wi] - 1] = body.vars[body_pos[wi] - 1];
            out.schema.constraints.push_back(Tgd{{body}, {head}});
        }
    }

    // Methods: a mix of unbounded and bounded accesses.
    int method_count = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < method_count; ++i) {
        int arity = 0;
        Symbol rel = random_rel(&arity);
        AccessMethod m;
        m.name = intern("m" + std::to_string(i));
        m.relation = rel;
        for (int p = 1; p <= arity; ++p)
            if (rng() % 2) m.inputs.push_back(p);
        switch (rng() % 4) {
        case 0: m.bound_kind = BoundKind::None; break;
        case 1:
            m.bound_kind = BoundKind::ResultBound;
            m.bound = 1;
            break;
        case 2:
            m.bound_kind = BoundKind::ResultBound;
            m.bound = 2;
            break;
        default:
            m.bound_kind = BoundKind::ResultLowerBound;
            m.bound = 5;
            break;
        }
        out.schema.methods.push_back(m);
    }

    // Query: one to three atoms over a small shared variable pool.
    out.query.name = intern("Q");
    int atom_count = 1 + static_cast<int>(rng() % 3);
    std::set<Symbol> used_vars;
    for (int i = 0; i < atom_count; ++i) {
        int arity = 0;
        Symbol rel = random_rel(&arity);
        QueryAtom atom{rel, {}};
        for (int p = 0; p < arity; ++p) {
            if (rng() % 8 == 0) {
                atom.terms.push_back(Term::constant(intern(pool_constant(rng))));
            } else {
                Symbol v = intern("q" + std::to_string(rng() % 3));
                atom.terms.push_back(Term::var(v));
                used_vars.insert(v);
            }
        }
        out.query.atoms.push_back(std::move(atom));
    }
    for (Symbol v : used_vars)
        if (rng() % 4 == 0) out.query.free_vars.push_back(v);
    return out;
}

nlohmann::json DiffReport::to_json() const {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records) {
        recs.push_back({{"index", r.index},
                        {"family", r.family},
                        {"decide", r.decide_answer},
                        {"oracle", r.oracle_answer},
                        {"comparable", r.comparable},
                        {"agree", r.agree},
                        {"skipped", r.skipped}});
    }
    return {{"seed", seed},
            {"cases", cases},
            {"comparable", comparable},
            {"disagreements", disagreements},
            {"skipped", skipped},
            {"records", recs}};
}

DiffReport differential_run(std::uint64_t seed, int case_count,
                            const std::vector<ConstraintClass>& families, const Budget& budget) {
    DiffReport report;
    report.seed = seed;
    CaseGenerator gen(seed);

    for (int i = 0; i < case_count; ++i) {
        ConstraintClass family = families[i % families.size()];
        RandomCase rc = gen.next(family);
        DiffRecord rec;
        rec.index = i;
        rec.family = to_string(family, 0);
        report.cases += 1;

        try {
            Verdict v = decide_monotone_answerability(rc.query, rc.schema, budget);
            rec.decide_answer = to_string(v.answer);

            auto oracle_p = oracle_problem(rc.query, rc.schema);
            auto oracle_r = naive_containment(oracle_p, budget);
            rec.oracle_answer = to_string(oracle_r.answer);

            bool decide_definite = v.answer != Answer::Unknown;
            bool oracle_definite = oracle_r.answer != OracleAnswer::Unknown;
            rec.comparable = decide_definite && oracle_definite;
            if (rec.comparable) {
                report.comparable += 1;
                bool both_yes =
                    v.answer == Answer::Answerable && oracle_r.answer == OracleAnswer::Holds;
                bool both_no = v.answer == Answer::NotAnswerable &&
                               oracle_r.answer == OracleAnswer::FailsWithin;
                rec.agree = both_yes || both_no;
                if (!rec.agree) report.disagreements += 1;
            }

            // Second oracle view for ID schemas: the normalized
            // existence-check gamma chased directly.
            if (rec.agree && family == ConstraintClass::IdOnly) {
                Schema lowered = elim_ub(rc.schema);
                auto [simplified, screport] = existence_check_simplify(lowered);
                auto normalized = normalize_existence_check_gamma(
                    split_accessibility_axioms(
                        build_amondet_containment(rc.query, simplified)),
                    screport);
                auto second = naive_containment(normalized, budget);
                bool decide_definite2 = v.answer != Answer::Unknown;
                if (decide_definite2 && second.answer != OracleAnswer::Unknown) {
                    bool both_yes = v.answer == Answer::Answerable &&
                                    second.answer == OracleAnswer::Holds;
                    bool both_no = v.answer == Answer::NotAnswerable &&
                                   second.answer == OracleAnswer::FailsWithin;
                    if (!(both_yes || both_no)) {
                        rec.agree = false;
                        report.disagreements += 1;
                    }
                }
            }
        } catch (const DecideError& e) {
            if (e.code == "FdConstantConflict") {
                rec.skipped = true;
                report.skipped += 1;
            } else {
                rec.agree = false;
                rec.decide_answer = std::string("error: ") + e.what();
                report.disagreements += 1;
            }
        }
        report.records.push_back(std::move(rec));
    }
    return report;
}

} // namespace rbqa
