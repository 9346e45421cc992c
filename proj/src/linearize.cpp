#include "rbqa/linearize.hpp"

#include <algorithm>

namespace rbqa {

namespace {

std::vector<std::vector<int>> subsets_up_to(int arity, int width) {
    std::vector<std::vector<int>> all{{}};
    for (int p = 1; p <= arity; ++p) {
        std::size_t n = all.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (static_cast<int>(all[i].size()) >= width) continue;
            auto next = all[i];
            next.push_back(p);
            all.push_back(std::move(next));
        }
    }
    std::sort(all.begin(), all.end());
    return all;
}

// Body position -> head position for the exported variables of an ID.
std::map<int, int> exported_position_map(const Tgd& id) {
    std::map<int, int> out;
    const TgdAtom& body = id.body.front();
    const TgdAtom& head = id.head.front();
    for (std::size_t b = 0; b < body.vars.size(); ++b)
        for (std::size_t h = 0; h < head.vars.size(); ++h)
            if (body.vars[b] == head.vars[h]) out[static_cast<int>(b + 1)] =
                static_cast<int>(h + 1);
    return out;
}

} // namespace

std::string AccTriple::to_string() const {
    std::string out = "(" + symbol_text(rel) + ", {";
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(positions[i]);
    }
    return out + "}, " + std::to_string(target) + ")";
}

Symbol lin_relation_name(Symbol rel, const std::vector<int>& positions) {
    std::string name = symbol_text(rel) + "__acc_";
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (i) name += "_";
        name += std::to_string(positions[i]);
    }
    return intern(name);
}

std::vector<AccTriple> saturate_truncated_axioms(std::span<const Tgd> ids,
                                                 std::span<const AccessMethod> methods,
                                                 const Signature& relations, int width) {
    for (const auto& id : ids) {
        if (!id.is_id())
            throw LinearizeError("NotAnId", "saturation requires inclusion dependencies");
        if (id.width() > width)
            throw LinearizeError("WidthExceeded", "dependency of width " +
                                                      std::to_string(id.width()) +
                                                      " exceeds bound " + std::to_string(width));
    }

    std::set<AccTriple> triples;
    for (const auto& [rel, arity] : relations.relations)
        for (const auto& p : subsets_up_to(arity, width))
            for (int j : p) triples.insert(AccTriple{rel, p, j});

    auto transferred = [&](Symbol rel, const std::vector<int>& p) {
        std::set<int> out;
        for (const auto& t : triples)
            if (t.rel == rel && t.positions == p) out.insert(t.target);
        return out;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        auto insert = [&](AccTriple t) {
            if (triples.insert(std::move(t)).second) changed = true;
        };

        // (ID): pull a head triple over exported positions back to the body.
        for (const auto& id : ids) {
            auto pos_map = exported_position_map(id);
            std::map<int, int> inverse;
            for (const auto& [b, h] : pos_map) inverse[h] = b;
            Symbol body_rel = id.body.front().rel;
            Symbol head_rel = id.head.front().rel;
            for (const auto& t : std::vector<AccTriple>(triples.begin(), triples.end())) {
                if (t.rel != head_rel) continue;
                if (!inverse.count(t.target)) continue;
                bool all_exported = std::all_of(t.positions.begin(), t.positions.end(),
                                                [&](int k) { return inverse.count(k) > 0; });
                if (!all_exported) continue;
                std::vector<int> body_positions;
                for (int k : t.positions) body_positions.push_back(inverse.at(k));
                std::sort(body_positions.begin(), body_positions.end());
                insert(AccTriple{body_rel, body_positions, inverse.at(t.target)});
            }
        }

        // (Transitivity): anything derivable from p plus what p already
        // transfers is transferred by p itself.
        for (const auto& [rel, arity] : relations.relations) {
            for (const auto& p : subsets_up_to(arity, width)) {
                std::set<int> reach = transferred(rel, p);
                std::set<int> closure = reach;
                for (int q : p) closure.insert(q);
                for (const auto& t : std::vector<AccTriple>(triples.begin(), triples.end())) {
                    if (t.rel != rel) continue;
                    bool covered = std::all_of(t.positions.begin(), t.positions.end(),
                                               [&](int r) { return closure.count(r) > 0; });
                    if (covered) insert(AccTriple{rel, p, t.target});
                }
            }
        }

        // (Access): once a subset transfers all inputs of an unbounded
        // method, the whole fact becomes accessible.
        for (const auto& m : methods) {
            if (m.bounded()) continue;
            auto arity = relations.arity(m.relation);
            if (!arity) continue;
            for (const auto& p : subsets_up_to(*arity, width)) {
                std::set<int> reach = transferred(m.relation, p);
                for (int q : p) reach.insert(q);
                bool covers = std::all_of(m.inputs.begin(), m.inputs.end(),
                                          [&](int i) { return reach.count(i) > 0; });
                if (!covers) continue;
                for (int j = 1; j <= *arity; ++j) insert(AccTriple{m.relation, p, j});
            }
        }
    }
    return {triples.begin(), triples.end()};
}

LinRules build_sigma_lin(std::span<const Tgd> ids, std::span<const AccessMethod> methods,
                         const std::vector<AccTriple>& triples, const Signature& relations,
                         int width) {
    LinRules out;
    std::set<AccTriple> index(triples.begin(), triples.end());
    auto transferred = [&](Symbol rel, const std::vector<int>& p) {
        std::set<int> result(p.begin(), p.end());
        for (const auto& t : index)
            if (t.rel == rel && t.positions == p) result.insert(t.target);
        return result;
    };

    // Signature: every R_P plus the base and primed relations.
    for (const auto& [rel, arity] : relations.relations) {
        out.lin_signature.add(rel, arity);
        for (const auto& p : subsets_up_to(arity, width))
            out.lin_signature.add(lin_relation_name(rel, p), arity);
    }
    for (const auto& [rel, arity] : relations.relations)
        out.lin_signature.add(primed(rel), arity);

    for (const auto& [rel, arity] : relations.relations) {
        for (const auto& p : subsets_up_to(arity, width)) {
            std::set<int> reach = transferred(rel, p);

            // (Transfer): accessible inputs of an unbounded method reveal the
            // fact itself.
            bool transfers_whole = false;
            for (const auto& m : methods) {
                if (m.bounded() || m.relation != rel) continue;
                if (std::all_of(m.inputs.begin(), m.inputs.end(),
                                [&](int i) { return reach.count(i) > 0; }))
                    transfers_whole = true;
            }
            TgdAtom sub_atom{lin_relation_name(rel, p), {}};
            for (int v = 1; v <= arity; ++v) sub_atom.vars.push_back(intern("v" + std::to_string(v)));
            if (transfers_whole) {
                TgdAtom primed_atom = sub_atom;
                primed_atom.rel = primed(rel);
                out.rules.push_back(
                    GammaRule{Tgd{{sub_atom}, {primed_atom}}, AxiomKind::Transfer, std::nullopt});
            }

            // (Result-bounded Fact Transfer): accessible inputs of a bounded
            // method reveal that some matching tuple exists.
            for (const auto& m : methods) {
                if (!m.bounded() || m.relation != rel) continue;
                if (!std::all_of(m.inputs.begin(), m.inputs.end(),
                                 [&](int i) { return reach.count(i) > 0; }))
                    continue;
                TgdAtom head{primed(rel), {}};
                for (int v = 1; v <= arity; ++v) {
                    bool is_input =
                        std::find(m.inputs.begin(), m.inputs.end(), v) != m.inputs.end();
                    head.vars.push_back(intern((is_input ? "v" : "z") + std::to_string(v)));
                }
                out.rules.push_back(GammaRule{Tgd{{sub_atom}, {head}},
                                              AxiomKind::ResultBoundedFactTransfer, m.name});
            }
        }
    }

    // (Lift): push subscripts through each inclusion dependency.
    for (const auto& id : ids) {
        const TgdAtom& body = id.body.front();
        const TgdAtom& head = id.head.front();
        auto pos_map = exported_position_map(id);
        int arity = static_cast<int>(body.vars.size());
        for (const auto& p : subsets_up_to(arity, width)) {
            std::set<int> reach = transferred(body.rel, p);
            std::vector<int> head_subscript;
            for (const auto& [b, h] : pos_map)
                if (reach.count(b)) head_subscript.push_back(h);
            std::sort(head_subscript.begin(), head_subscript.end());
            TgdAtom lifted_body{lin_relation_name(body.rel, p), body.vars};
            TgdAtom lifted_head{lin_relation_name(head.rel, head_subscript), head.vars};
            out.rules.push_back(
                GammaRule{Tgd{{lifted_body}, {lifted_head}}, AxiomKind::SigmaOriginal, std::nullopt});
        }
    }
    return out;
}

Instance build_i0_lin(const Instance& i0, std::span<const AccessMethod> methods,
                      const std::vector<AccTriple>& triples, const Signature& relations,
                      int width) {
    // Close the accessible set under the original access axioms and the
    // derived triples.
    std::set<Value> acc;
    for (const auto& t : i0.tuples(accessible_relation())) acc.insert(t[0]);

    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [rel, arity] : relations.relations) {
            for (const auto& tuple : i0.tuples(rel)) {
                for (const auto& m : methods) {
                    if (m.bounded() || m.relation != rel) continue;
                    bool inputs_acc = std::all_of(m.inputs.begin(), m.inputs.end(), [&](int p) {
                        return acc.count(tuple[p - 1]) > 0;
                    });
                    if (!inputs_acc) continue;
                    for (const Value& v : tuple)
                        if (acc.insert(v).second) changed = true;
                }
                for (const auto& t : triples) {
                    if (t.rel != rel) continue;
                    bool premises = std::all_of(t.positions.begin(), t.positions.end(),
                                                [&](int p) { return acc.count(tuple[p - 1]) > 0; });
                    if (premises && acc.insert(tuple[t.target - 1]).second) changed = true;
                }
            }
        }
    }

    Instance out = i0;
    for (const Value& v : acc) out.add(Fact{accessible_relation(), {v}});

    std::uint32_t next_null = 0;
    for (const auto& f : i0.all_facts())
        for (const Value& v : f.tuple)
            if (v.is_null()) next_null = std::max(next_null, v.id() + 1);

    for (const auto& [rel, arity] : relations.relations) {
        for (const auto& tuple : i0.tuples(rel)) {
            std::vector<int> accessible_positions;
            for (int p = 1; p <= arity; ++p)
                if (acc.count(tuple[p - 1])) accessible_positions.push_back(p);

            // Every accessible subset of size <= w becomes a subscripted fact.
            std::vector<std::vector<int>> subs{{}};
            for (int p : accessible_positions) {
                std::size_t n = subs.size();
                for (std::size_t i = 0; i < n; ++i) {
                    if (static_cast<int>(subs[i].size()) >= width) continue;
                    auto next = subs[i];
                    next.push_back(p);
                    subs.push_back(std::move(next));
                }
            }
            for (auto& p : subs) {
                std::sort(p.begin(), p.end());
                out.add(Fact{lin_relation_name(rel, p), tuple});
            }
            if (static_cast<int>(accessible_positions.size()) == arity)
                out.add(Fact{primed(rel), tuple});

            // Seed-level bounded access: accessible inputs beyond the width
            // bound are still accessible here, so apply the transfer eagerly.
            for (const auto& m : methods) {
                if (!m.bounded() || m.relation != rel) continue;
                bool inputs_acc = std::all_of(m.inputs.begin(), m.inputs.end(), [&](int p) {
                    return acc.count(tuple[p - 1]) > 0;
                });
                if (!inputs_acc) continue;
                bool satisfied = false;
                for (const auto& existing : out.tuples(primed(rel))) {
                    bool match = std::all_of(m.inputs.begin(), m.inputs.end(), [&](int p) {
                        return existing[p - 1] == tuple[p - 1];
                    });
                    if (match) {
                        satisfied = true;
                        break;
                    }
                }
                if (satisfied) continue;
                Tuple image;
                for (int p = 1; p <= arity; ++p) {
                    bool is_input = std::find(m.inputs.begin(), m.inputs.end(), p) != m.inputs.end();
                    image.push_back(is_input ? tuple[p - 1] : Value::null(next_null++));
                }
                out.add(Fact{primed(rel), image});
            }
        }
    }
    return out;
}

std::optional<SemiWidthDecomposition> semiwidth_decompose(std::span<const Tgd> ids, int width) {
    SemiWidthDecomposition out;
    for (const auto& id : ids) {
        if (!id.is_id()) return std::nullopt;
        (id.width() <= width ? out.sigma1 : out.sigma2).push_back(id);
    }

    // Position graph of sigma2: one edge per exported variable occurrence.
    std::map<std::pair<Symbol, int>, std::vector<std::pair<Symbol, int>>> graph;
    for (const auto& id : out.sigma2) {
        auto pos_map = exported_position_map(id);
        Symbol body_rel = id.body.front().rel;
        Symbol head_rel = id.head.front().rel;
        for (const auto& [b, h] : pos_map)
            graph[{body_rel, b}].push_back({head_rel, h});
    }
    std::map<std::pair<Symbol, int>, int> state; // 0 unseen, 1 active, 2 done
    std::function<bool(const std::pair<Symbol, int>&)> has_cycle =
        [&](const std::pair<Symbol, int>& node) -> bool {
        int& s = state[node];
        if (s == 1) return true;
        if (s == 2) return false;
        s = 1;
        for (const auto& next : graph[node])
            if (has_cycle(next)) return true;
        s = 2;
        return false;
    };
    for (const auto& [node, edges] : graph)
        if (has_cycle(node)) return std::nullopt;
    return out;
}

LinearizedProblem linearize_problem(const ContainmentProblem& normalized, int width) {
    // Base relations: unprimed, non-bookkeeping relations of the problem.
    Signature base;
    for (const auto& [rel, arity] : normalized.extended.relations) {
        const std::string& text = symbol_text(rel);
        if (rel == accessible_relation()) continue;
        if (text.ends_with("'")) continue;
        if (text.find("__acc") != std::string::npos) continue;
        base.add(rel, arity);
    }

    std::vector<Tgd> sigma;
    std::vector<GammaRule> sigma_primed;
    for (const auto& rule : normalized.gamma) {
        if (rule.kind == AxiomKind::SigmaOriginal) {
            const auto* t = std::get_if<Tgd>(&rule.dep);
            if (!t || !t->is_id())
                throw LinearizeError("NotAnId", "linearization requires ID constraints");
            sigma.push_back(*t);
        } else if (rule.kind == AxiomKind::SigmaPrimed) {
            sigma_primed.push_back(rule);
        }
    }

    LinearizedProblem out;
    out.width = width;
    out.triples = saturate_truncated_axioms(sigma, normalized.methods, base, width);
    LinRules lin = build_sigma_lin(sigma, normalized.methods, out.triples, base, width);
    out.rules = std::move(lin.rules);
    for (const auto& rule : sigma_primed) out.rules.push_back(rule);
    out.lin_signature = std::move(lin.lin_signature);
    out.initial = build_i0_lin(normalized.initial, normalized.methods, out.triples, base, width);
    out.target = normalized.target;
    out.frozen_base = normalized.frozen_base;
    return out;
}

LinDecision decide_containment_semiwidth(const LinearizedProblem& p, const Budget& budget) {
    LinDecision decision;

    std::vector<Tgd> all_ids;
    for (const auto& rule : p.rules)
        if (const auto* t = std::get_if<Tgd>(&rule.dep)) all_ids.push_back(*t);
    if (!semiwidth_decompose(all_ids, p.width))
        throw LinearizeError("NotSemiWidthBounded",
                             "constraint set is not semi-width bounded by " +
                                 std::to_string(p.width));

    // Tight matches live within depth 2k * |Sigma| * m^(w+1): any deeper
    // branch repeats a rule with the same inherited-value configuration.
    long m = 1;
    for (const auto& [rel, arity] : p.lin_signature.relations) m = std::max<long>(m, arity);
    long pow = 1;
    for (int i = 0; i <= p.width; ++i) pow *= m;
    long k = static_cast<long>(p.target.atoms.size());
    long depth = 2 * k * static_cast<long>(all_ids.size()) * pow;
    decision.depth_bound = depth;

    Budget chase_budget;
    chase_budget.max_depth = static_cast<int>(std::min<long>(depth, 1u << 30));
    chase_budget.max_rounds = static_cast<int>(std::min<long>(depth + 2, 1u << 30));
    chase_budget.max_facts = budget.max_facts;

    std::vector<Dependency> deps;
    for (const auto& rule : p.rules) deps.push_back(rule.dep);

    Assignment witness;
    auto hook = [&](const ChaseState& state) {
        Assignment fixed;
        for (Symbol v : p.target.free_vars) {
            auto it = p.frozen_base.find(v);
            Value base = it == p.frozen_base.end() ? Value::frozen(v) : it->second;
            fixed.emplace(v, state.canon(base));
        }
        auto hom = find_homomorphism(p.target, state.instance(), fixed);
        if (hom) witness = *hom;
        return hom.has_value();
    };

    auto result = chase_to_fixpoint(p.initial, deps, chase_budget, {}, hook);
    decision.stats = result.stats;
    switch (result.outcome) {
    case ChaseOutcome::StoppedEarly:
        decision.holds = true;
        decision.witness = witness;
        break;
    case ChaseOutcome::Saturated:
        decision.holds = false;
        break;
    case ChaseOutcome::BudgetExhausted:
        if (result.stats.facts_overflow || result.stats.rounds_overflow)
            decision.budget_exceeded = true; // indefinite: report, never truncate
        decision.holds = false;
        break;
    case ChaseOutcome::FdConflict:
        throw LinearizeError("UnexpectedFdConflict", "ID chase cannot merge values");
    }
    return decision;
}

} // namespace rbqa
