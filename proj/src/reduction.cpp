#include "rbqa/reduction.hpp"

#include <algorithm>

namespace rbqa {

namespace {

Symbol var_for_position(int p) { return intern("v" + std::to_string(p)); }
Symbol fresh_var_for_position(int p) { return intern("z" + std::to_string(p)); }

TgdAtom relation_atom(Symbol rel, int arity) {
    TgdAtom atom{rel, {}};
    for (int p = 1; p <= arity; ++p) atom.vars.push_back(var_for_position(p));
    return atom;
}

TgdAtom accessible_atom(Symbol var) { return TgdAtom{accessible_relation(), {var}}; }

Tgd prime_tgd(const Tgd& t) {
    Tgd out = t;
    for (auto& a : out.body) a.rel = primed(a.rel);
    for (auto& a : out.head) a.rel = primed(a.rel);
    return out;
}

Fd prime_fd(const Fd& f) { return Fd{primed(f.rel), f.determinant, f.determined}; }

} // namespace

Symbol accessible_relation() { return intern("accessible"); }

const char* to_string(AxiomKind kind) {
    switch (kind) {
    case AxiomKind::SigmaOriginal: return "sigma";
    case AxiomKind::SigmaPrimed: return "sigma-primed";
    case AxiomKind::NoBoundRewritten: return "no-bound";
    case AxiomKind::LowerBoundOne: return "lower-bound-one";
    case AxiomKind::AccToBoth: return "acc-to-both";
    case AxiomKind::TruncatedAccessibility: return "truncated-accessibility";
    case AxiomKind::Transfer: return "transfer";
    case AxiomKind::ResultBoundedFactTransfer: return "result-bounded-fact-transfer";
    }
    return "?";
}

std::string CountingAxiom::to_string() const {
    std::string body, head;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        body += "accessible(v" + std::to_string(inputs[i]) + "), ";
    }
    body += "exists>=" + std::to_string(threshold) + " " + symbol_text(relation);
    head = "exists>=" + std::to_string(threshold) + " " + symbol_text(relation) + "__acc";
    return body + " -> " + head + "  # method " + symbol_text(method);
}

ConjunctiveQuery prime_query(const ConjunctiveQuery& q) {
    ConjunctiveQuery out = q;
    out.name = primed(q.name);
    for (auto& atom : out.atoms) atom.rel = primed(atom.rel);
    return out;
}

std::vector<Dependency> ContainmentProblem::chase_deps() const {
    std::vector<Dependency> deps;
    deps.reserve(gamma.size());
    for (const auto& rule : gamma) deps.push_back(rule.dep);
    return deps;
}

Assignment ContainmentProblem::target_fixed(const ChaseState& state) const {
    Assignment fixed;
    for (Symbol v : target.free_vars) {
        auto it = frozen_base.find(v);
        Value base = it == frozen_base.end() ? Value::frozen(v) : it->second;
        fixed.emplace(v, state.canon(base));
    }
    return fixed;
}

bool ContainmentProblem::target_matches(const ChaseState& state, Assignment* witness) const {
    auto hom = find_homomorphism(target, state.instance(), target_fixed(state));
    if (hom && witness) *witness = *hom;
    return hom.has_value();
}

ContainmentProblem build_amondet_containment(const ConjunctiveQuery& q, const Schema& s) {
    check_query(q, s.signature);
    ContainmentProblem p;
    p.source = q;
    p.target = prime_query(q);
    p.base_signature = s.signature;
    p.methods = s.methods;

    // Extended signature: originals, primed copies, accessible, and one
    // selection relation R_acc per relation carrying a bounded method.
    p.extended = s.signature;
    for (const auto& [rel, arity] : s.signature.relations) p.extended.add(primed(rel), arity);
    p.extended.add(accessible_relation(), 1);

    for (const auto& dep : s.constraints) {
        if (const auto* tgd = std::get_if<Tgd>(&dep)) {
            p.gamma.push_back(GammaRule{*tgd, AxiomKind::SigmaOriginal, std::nullopt});
        } else {
            p.gamma.push_back(GammaRule{std::get<Fd>(dep), AxiomKind::SigmaOriginal, std::nullopt});
        }
    }
    for (const auto& dep : s.constraints) {
        if (const auto* tgd = std::get_if<Tgd>(&dep)) {
            p.gamma.push_back(GammaRule{prime_tgd(*tgd), AxiomKind::SigmaPrimed, std::nullopt});
        } else {
            p.gamma.push_back(
                GammaRule{prime_fd(std::get<Fd>(dep)), AxiomKind::SigmaPrimed, std::nullopt});
        }
    }

    std::set<Symbol> acc_relations; // relations needing R_acc
    for (const auto& m : s.methods) {
        int arity = s.signature.arity(m.relation).value();
        TgdAtom base = relation_atom(m.relation, arity);
        if (!m.bounded()) {
            // acc(x) & R(x,y) -> R'(x,y) & acc(y_i)
            Tgd axiom;
            for (int pos : m.inputs) axiom.body.push_back(accessible_atom(var_for_position(pos)));
            axiom.body.push_back(base);
            TgdAtom primed_head = base;
            primed_head.rel = primed(m.relation);
            axiom.head.push_back(primed_head);
            for (int pos : m.outputs(arity))
                axiom.head.push_back(accessible_atom(var_for_position(pos)));
            p.gamma.push_back(GammaRule{axiom, AxiomKind::NoBoundRewritten, m.name});
            continue;
        }
        // Lower bound: threshold 1 is a plain TGD into R_acc; higher
        // thresholds stay symbolic.
        Symbol racc = intern(symbol_text(m.relation) + "__acc");
        if (!acc_relations.count(m.relation)) {
            acc_relations.insert(m.relation);
            p.extended.add(racc, arity);
        }
        Tgd lower;
        for (int pos : m.inputs) lower.body.push_back(accessible_atom(var_for_position(pos)));
        lower.body.push_back(base);
        TgdAtom selected{racc, {}};
        for (int pos = 1; pos <= arity; ++pos) {
            bool is_input = std::find(m.inputs.begin(), m.inputs.end(), pos) != m.inputs.end();
            selected.vars.push_back(is_input ? var_for_position(pos) : fresh_var_for_position(pos));
        }
        lower.head.push_back(selected);
        p.gamma.push_back(GammaRule{lower, AxiomKind::LowerBoundOne, m.name});
        for (long j = 2; j <= m.bound; ++j)
            p.counting.push_back(CountingAxiom{m.relation, m.inputs, j, m.name});
    }
    // R_acc(w) -> R(w) & R'(w) & acc(w_i), once per relation with a bound.
    for (const auto& [rel, arity] : s.signature.relations) {
        if (!acc_relations.count(rel)) continue;
        Symbol racc = intern(symbol_text(rel) + "__acc");
        TgdAtom source = relation_atom(racc, arity);
        Tgd unfold;
        unfold.body.push_back(source);
        TgdAtom plain = source;
        plain.rel = rel;
        TgdAtom prime = source;
        prime.rel = primed(rel);
        unfold.head.push_back(plain);
        unfold.head.push_back(prime);
        for (int pos = 1; pos <= arity; ++pos)
            unfold.head.push_back(accessible_atom(var_for_position(pos)));
        p.gamma.push_back(GammaRule{unfold, AxiomKind::AccToBoth, std::nullopt});
    }

    p.initial = canonical_db(q, s.signature);
    for (Symbol c : q.constants())
        p.initial.add(Fact{accessible_relation(), {Value::constant(c)}});
    return p;
}

ContainmentProblem split_accessibility_axioms(ContainmentProblem p) {
    if (!p.counting.empty())
        throw ReductionError("CountingAxiomPresent",
                             "cannot split accessibility axioms while symbolic counting axioms remain");
    std::vector<GammaRule> gamma;
    for (auto& rule : p.gamma) {
        if (rule.kind != AxiomKind::NoBoundRewritten) {
            gamma.push_back(std::move(rule));
            continue;
        }
        const Tgd& tgd = std::get<Tgd>(rule.dep);
        // Body is shared: acc premises plus the relation atom. The head holds
        // one primed atom followed by the accessibility atoms.
        Tgd transfer;
        transfer.body = tgd.body;
        transfer.head.push_back(tgd.head.front());
        gamma.push_back(GammaRule{transfer, AxiomKind::Transfer, rule.method});
        for (std::size_t i = 1; i < tgd.head.size(); ++i) {
            Tgd truncated;
            truncated.body = tgd.body;
            truncated.head.push_back(tgd.head[i]);
            gamma.push_back(GammaRule{truncated, AxiomKind::TruncatedAccessibility, rule.method});
        }
    }
    p.gamma = std::move(gamma);
    return p;
}

ContainmentProblem normalize_existence_check_gamma(ContainmentProblem p,
                                                   const SimplificationReport& report) {
    if (report.kind != SimplKind::ExistenceCheck)
        throw ReductionError("NotExistenceCheckForm",
                             "normalization requires an existence-check simplification report");
    std::set<Symbol> views;
    for (const auto& [view, info] : report.views) {
        views.insert(view);
        views.insert(primed(view));
    }
    auto mentions_view = [&](const Tgd& t) {
        for (const auto& a : t.body)
            if (views.count(a.rel)) return true;
        for (const auto& a : t.head)
            if (views.count(a.rel)) return true;
        return false;
    };

    std::vector<GammaRule> gamma;
    for (auto& rule : p.gamma) {
        bool drop = false;
        if (const auto* tgd = std::get_if<Tgd>(&rule.dep)) drop = mentions_view(*tgd);
        if (!drop) gamma.push_back(std::move(rule));
    }

    // One Result-bounded Fact Transfer per bounded method, with the
    // accessibility premise on its input positions.
    for (const auto& [view, info] : report.views) {
        int arity = p.base_signature.arity(info.base).value();
        Tgd rbft;
        for (int pos : info.base_positions)
            rbft.body.push_back(accessible_atom(var_for_position(pos)));
        rbft.body.push_back(relation_atom(info.base, arity));
        TgdAtom head{primed(info.base), {}};
        for (int pos = 1; pos <= arity; ++pos) {
            bool is_input = std::find(info.base_positions.begin(), info.base_positions.end(),
                                      pos) != info.base_positions.end();
            head.vars.push_back(is_input ? var_for_position(pos) : fresh_var_for_position(pos));
        }
        rbft.head.push_back(head);
        gamma.push_back(GammaRule{rbft, AxiomKind::ResultBoundedFactTransfer, info.method});
    }
    p.gamma = std::move(gamma);

    // The view relations are gone from gamma; shrink the signature to match.
    Signature extended;
    for (const auto& [rel, arity] : p.extended.relations)
        if (!views.count(rel)) extended.add(rel, arity);
    p.extended = std::move(extended);
    // Replace the Boolean view methods by their originating bounded methods,
    // so later stages see the original access structure.
    std::erase_if(p.methods, [&](const AccessMethod& m) { return views.count(m.relation) > 0; });
    for (const auto& [view, info] : report.views) {
        AccessMethod m;
        m.name = info.method;
        m.relation = info.base;
        m.inputs = info.base_positions;
        m.bound_kind = BoundKind::ResultLowerBound;
        m.bound = 1;
        p.methods.push_back(m);
    }
    return p;
}

bool apply_fds_to_initial(ContainmentProblem& p, std::span<const Fd> fds) {
    if (fds.empty()) return true;
    std::vector<Dependency> fd_deps;
    for (const auto& fd : fds) fd_deps.emplace_back(fd);
    auto result = chase_to_fixpoint(p.initial, fd_deps, Budget::unlimited());
    if (result.outcome == ChaseOutcome::FdConflict) {
        p.seed_unsatisfiable = true;
        return false;
    }
    Instance minimized;
    for (const auto& f : result.state.instance().all_facts()) minimized.add(f);
    p.initial = std::move(minimized);
    for (Symbol v : p.target.free_vars) {
        Value canon = result.state.canon(Value::frozen(v));
        if (canon != Value::frozen(v)) p.frozen_base.insert_or_assign(v, canon);
    }
    return true;
}

ContainmentProblem uidfd_separable_rewrite(ContainmentProblem p, std::span<const Fd> fds) {
    // The bound-1 axioms arrive as LowerBoundOne + AccToBoth pairs; inline
    // them per method and export the positions determined by the inputs.
    std::vector<GammaRule> gamma;
    for (auto& rule : p.gamma) {
        if (rule.kind == AxiomKind::AccToBoth) continue;
        if (rule.kind == AxiomKind::SigmaOriginal || rule.kind == AxiomKind::SigmaPrimed) {
            if (std::holds_alternative<Fd>(rule.dep)) continue; // separability: drop FDs
        }
        if (rule.kind != AxiomKind::LowerBoundOne) {
            gamma.push_back(std::move(rule));
            continue;
        }
        const AccessMethod* m = nullptr;
        for (const auto& cand : p.methods)
            if (rule.method && cand.name == *rule.method) m = &cand;
        if (!m)
            throw ReductionError("NotUidFdClass", "lower-bound axiom without a method");
        int arity = p.base_signature.arity(m->relation).value();
        std::set<int> inputs(m->inputs.begin(), m->inputs.end());
        std::set<int> determined = detby(fds, m->relation, inputs);

        Tgd expanded;
        for (int pos : m->inputs) expanded.body.push_back(accessible_atom(var_for_position(pos)));
        expanded.body.push_back(relation_atom(m->relation, arity));
        TgdAtom chosen{m->relation, {}};
        for (int pos = 1; pos <= arity; ++pos)
            chosen.vars.push_back(determined.count(pos) ? var_for_position(pos)
                                                        : fresh_var_for_position(pos));
        TgdAtom chosen_primed = chosen;
        chosen_primed.rel = primed(m->relation);
        expanded.head.push_back(chosen);
        expanded.head.push_back(chosen_primed);
        for (int pos = 1; pos <= arity; ++pos)
            if (!inputs.count(pos)) expanded.head.push_back(accessible_atom(chosen.vars[pos - 1]));
        gamma.push_back(GammaRule{expanded, AxiomKind::LowerBoundOne, rule.method});
    }
    p.gamma = std::move(gamma);

    // Apply the FDs to the initial instance (query minimization at the
    // instance level), then never chase them again.
    if (!apply_fds_to_initial(p, fds)) return p;

    // Primed UIDs must fire last.
    p.policy.order = RoundOrder::PrimedUidsLast;
    p.policy.fire_last.assign(p.gamma.size(), false);
    for (std::size_t i = 0; i < p.gamma.size(); ++i) {
        if (p.gamma[i].kind != AxiomKind::SigmaPrimed) continue;
        if (const auto* tgd = std::get_if<Tgd>(&p.gamma[i].dep))
            if (tgd->is_uid()) p.policy.fire_last[i] = true;
    }

    // Drop the now-unused selection relations.
    Signature extended;
    for (const auto& [rel, arity] : p.extended.relations) {
        const std::string& text = symbol_text(rel);
        if (text.size() > 5 && text.rfind("__acc") == text.size() - 5) continue;
        extended.add(rel, arity);
    }
    p.extended = std::move(extended);
    return p;
}

} // namespace rbqa
