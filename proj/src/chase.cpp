#include "rbqa/chase.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>

namespace rbqa {

using json = nlohmann::json;

ChaseState::ChaseState(Instance initial) {
    std::uint32_t max_null = 0;
    bool any_null = false;
    for (const auto& f : initial.all_facts()) {
        facts_.add(f);
        depth_[f] = 0;
        for (Value v : f.tuple)
            if (v.is_null()) {
                any_null = true;
                max_null = std::max(max_null, v.id());
            }
    }
    next_null_ = any_null ? max_null + 1 : 0;
}

int ChaseState::depth_of(const Fact& f) const {
    auto it = depth_.find(canon(f));
    return it == depth_.end() ? 0 : it->second;
}

bool ChaseState::add_fact(Fact f, int depth) {
    Fact c = canon(f);
    bool added = facts_.add(c);
    if (added) delta_.insert(c);
    auto it = depth_.find(c);
    if (it == depth_.end())
        depth_[c] = depth;
    else
        it->second = std::min(it->second, depth);
    return added;
}

std::vector<Fact> ChaseState::take_delta() {
    std::vector<Fact> out(delta_.begin(), delta_.end());
    delta_.clear();
    return out;
}

bool ChaseState::merge_values(Value a, Value b) {
    auto result = uf_.merge(a, b);
    if (result.conflict) return false;
    if (result.merged) recanonicalize();
    return true;
}

void ChaseState::recanonicalize() {
    Instance rebuilt;
    std::map<Fact, int> depths;
    for (const auto& f : facts_.all_facts()) {
        Fact c = canon(f);
        int d = depth_.count(f) ? depth_.at(f) : 0;
        if (!(c == f)) delta_.insert(c); // rewritten facts can enable new joins
        rebuilt.add(c);
        auto it = depths.find(c);
        if (it == depths.end())
            depths[c] = d;
        else
            it->second = std::min(it->second, d);
    }
    facts_ = std::move(rebuilt);
    depth_ = std::move(depths);
}

void ChaseState::begin_round() {
    ++round_;
    log_.push_back(RoundLog{round_, {}, {}});
}

RoundLog& ChaseState::current_log() {
    if (log_.empty()) log_.push_back(RoundLog{round_, {}, {}});
    return log_.back();
}

namespace {

ConjunctiveQuery atoms_as_query(const std::vector<TgdAtom>& atoms) {
    ConjunctiveQuery q;
    q.name = intern("_body");
    for (const auto& a : atoms) {
        QueryAtom qa{a.rel, {}};
        for (Symbol v : a.vars) qa.terms.push_back(Term::var(v));
        q.atoms.push_back(std::move(qa));
    }
    return q;
}

// True when the head of `tgd` admits an extension of `hom` in `state`.
bool head_satisfied(const ChaseState& state, const Tgd& tgd, const Assignment& hom) {
    ConjunctiveQuery head_query = atoms_as_query(tgd.head);
    Assignment fixed;
    auto head_vars = tgd.head_vars();
    for (const auto& [v, val] : hom)
        if (head_vars.count(v)) fixed.emplace(v, state.canon(val));
    if (head_query.atoms.empty()) return true;
    return find_homomorphism(head_query, state.instance(), fixed).has_value();
}

std::vector<Fact> body_image(const ChaseState& state, const Tgd& tgd, const Assignment& hom) {
    std::vector<Fact> image;
    for (const auto& atom : tgd.body) {
        Tuple t;
        for (Symbol v : atom.vars) t.push_back(state.canon(hom.at(v)));
        image.push_back(Fact{atom.rel, std::move(t)});
    }
    return image;
}

} // namespace

namespace {

void collect_tgd_triggers(const ChaseState& state, const Tgd& tgd, int dep_index,
                          const Assignment& fixed, std::vector<Trigger>& out) {
    ConjunctiveQuery body = atoms_as_query(tgd.body);
    for_each_homomorphism(body, state.instance(), fixed, [&](const Assignment& hom) {
        if (!head_satisfied(state, tgd, hom)) {
            Trigger t;
            t.dep_index = dep_index;
            t.is_fd = false;
            t.hom = hom;
            t.image = body_image(state, tgd, hom);
            out.push_back(std::move(t));
        }
        return true;
    });
}

// FD violations grouped by determinant projection: within a group, every
// distinct determined value beyond the first yields one merge trigger.
void collect_fd_triggers(const ChaseState& state, const Fd& fd, int dep_index,
                         const std::set<Tuple>* restrict_to, std::vector<Trigger>& out) {
    std::map<Tuple, std::map<Value, Tuple>> groups; // det-proj -> determined -> witness
    for (const auto& t : state.instance().tuples(fd.rel)) {
        Tuple key;
        for (int p : fd.determinant) key.push_back(t[p - 1]);
        auto& group = groups[key];
        group.emplace(t[fd.determined - 1], t);
    }
    for (const auto& [key, group] : groups) {
        if (group.size() < 2) continue;
        const Tuple& first = group.begin()->second;
        for (auto it = std::next(group.begin()); it != group.end(); ++it) {
            if (restrict_to && !restrict_to->count(first) && !restrict_to->count(it->second))
                continue;
            Trigger t;
            t.dep_index = dep_index;
            t.is_fd = true;
            t.image = {Fact{fd.rel, first}, Fact{fd.rel, it->second}};
            out.push_back(std::move(t));
        }
    }
}

} // namespace

std::vector<Trigger> find_active_triggers(const ChaseState& state,
                                          std::span<const Dependency> deps) {
    std::vector<Trigger> triggers;
    for (std::size_t i = 0; i < deps.size(); ++i) {
        if (const auto* tgd = std::get_if<Tgd>(&deps[i])) {
            if (tgd->body.empty()) continue;
            collect_tgd_triggers(state, *tgd, static_cast<int>(i), {}, triggers);
        } else {
            collect_fd_triggers(state, std::get<Fd>(deps[i]), static_cast<int>(i), nullptr,
                                triggers);
        }
    }
    std::sort(triggers.begin(), triggers.end());
    return triggers;
}

std::vector<Trigger> find_active_triggers_delta(const ChaseState& state,
                                                std::span<const Dependency> deps,
                                                std::span<const Fact> delta) {
    std::map<Symbol, std::set<Tuple>> by_rel;
    for (const auto& f : delta) by_rel[f.rel].insert(f.tuple);

    std::vector<Trigger> triggers;
    for (std::size_t i = 0; i < deps.size(); ++i) {
        if (const auto* tgd = std::get_if<Tgd>(&deps[i])) {
            if (tgd->body.empty()) continue;
            // Pivot each body atom through the delta facts of its relation.
            for (std::size_t pivot = 0; pivot < tgd->body.size(); ++pivot) {
                const TgdAtom& atom = tgd->body[pivot];
                auto it = by_rel.find(atom.rel);
                if (it == by_rel.end()) continue;
                for (const Tuple& t : it->second) {
                    if (t.size() != atom.vars.size()) continue;
                    Assignment fixed;
                    bool ok = true;
                    for (std::size_t k = 0; k < t.size() && ok; ++k) {
                        auto [pos, inserted] = fixed.emplace(atom.vars[k], t[k]);
                        ok = inserted || pos->second == t[k];
                    }
                    if (ok) collect_tgd_triggers(state, *tgd, static_cast<int>(i), fixed, triggers);
                }
            }
        } else {
            const Fd& fd = std::get<Fd>(deps[i]);
            auto it = by_rel.find(fd.rel);
            if (it == by_rel.end()) continue;
            collect_fd_triggers(state, fd, static_cast<int>(i), &it->second, triggers);
        }
    }
    std::sort(triggers.begin(), triggers.end());
    triggers.erase(std::unique(triggers.begin(), triggers.end()), triggers.end());
    return triggers;
}

FireResult fire(ChaseState& state, const Trigger& trigger, std::span<const Dependency> deps,
                int max_depth) {
    const Dependency& dep = deps[trigger.dep_index];
    auto& log = state.current_log();

    if (trigger.is_fd) {
        const Fd& fd = std::get<Fd>(dep);
        Fact fa = state.canon(trigger.image[0]);
        Fact fb = state.canon(trigger.image[1]);
        if (!state.instance().contains(fa) || !state.instance().contains(fb))
            return FireResult::Inactive;
        Value va = fa.tuple[fd.determined - 1];
        Value vb = fb.tuple[fd.determined - 1];
        if (va == vb) return FireResult::Inactive;
        bool agree = std::all_of(fd.determinant.begin(), fd.determinant.end(),
                                 [&](int p) { return fa.tuple[p - 1] == fb.tuple[p - 1]; });
        if (!agree) return FireResult::Inactive;
        Value rep = prefer_as_representative(va, vb) ? va : vb;
        Value other = (rep == va) ? vb : va;
        if (!state.merge_values(va, vb)) return FireResult::Conflict;
        log.merges.push_back(MergeEvent{other, rep});
        return FireResult::Fired;
    }

    const Tgd& tgd = std::get<Tgd>(dep);
    Assignment hom;
    for (const auto& [v, val] : trigger.hom) hom.emplace(v, state.canon(val));
    for (const Fact& f : trigger.image)
        if (!state.instance().contains(state.canon(f))) return FireResult::Inactive;
    if (head_satisfied(state, tgd, hom)) return FireResult::Inactive;

    int parent_depth = 0;
    for (const Fact& f : trigger.image)
        parent_depth = std::max(parent_depth, state.depth_of(f));
    if (parent_depth + 1 > max_depth) return FireResult::DepthSkipped;

    // One fresh null per existential variable, shared across head atoms,
    // numbered in first-occurrence order.
    Assignment extended = hom;
    for (const auto& atom : tgd.head)
        for (Symbol v : atom.vars)
            if (!extended.count(v)) extended.emplace(v, state.fresh_null());

    FiringEvent event;
    event.dep_index = trigger.dep_index;
    for (const Fact& f : trigger.image) event.body.push_back(state.canon(f));
    for (const auto& atom : tgd.head) {
        Tuple t;
        for (Symbol v : atom.vars) t.push_back(extended.at(v));
        Fact f{atom.rel, std::move(t)};
        state.add_fact(f, parent_depth + 1);
        event.produced.push_back(state.canon(f));
    }
    log.firings.push_back(std::move(event));
    return FireResult::Fired;
}

ChaseResult chase_to_fixpoint(Instance initial, std::span<const Dependency> deps,
                              const Budget& budget, const ChasePolicy& policy,
                              const std::function<bool(const ChaseState&)>& match_hook) {
    ChaseResult result;
    result.state = ChaseState(std::move(initial));
    ChaseState& state = result.state;
    ChaseStats& stats = result.stats;

    if (match_hook && match_hook(state)) {
        result.outcome = ChaseOutcome::StoppedEarly;
        return result;
    }

    // Depth-skipped triggers stay active but will not reappear in a delta
    // search, so they are carried into the next round explicitly.
    std::vector<Trigger> carried;
    bool first_round = true;
    while (true) {
        std::vector<Trigger> triggers;
        if (first_round) {
            triggers = find_active_triggers(state, deps);
            first_round = false;
            state.take_delta();
        } else {
            auto delta = state.take_delta();
            triggers = find_active_triggers_delta(state, deps, delta);
            triggers.insert(triggers.end(), carried.begin(), carried.end());
            std::sort(triggers.begin(), triggers.end());
            triggers.erase(std::unique(triggers.begin(), triggers.end()), triggers.end());
        }
        carried.clear();

        if (policy.order == RoundOrder::PrimedUidsLast && !policy.fire_last.empty()) {
            bool any_normal = std::any_of(triggers.begin(), triggers.end(), [&](const Trigger& t) {
                return !policy.fire_last[t.dep_index];
            });
            if (any_normal) {
                // The held-back triggers must not be forgotten once the
                // productive rules dry up.
                for (const Trigger& t : triggers)
                    if (policy.fire_last[t.dep_index]) carried.push_back(t);
                std::erase_if(triggers,
                              [&](const Trigger& t) { return policy.fire_last[t.dep_index]; });
            }
        }
        if (triggers.empty()) {
            result.outcome = ChaseOutcome::Saturated;
            return result;
        }
        if (stats.rounds + 1 > budget.max_rounds) {
            stats.rounds_overflow = true;
            result.outcome = ChaseOutcome::BudgetExhausted;
            return result;
        }

        state.begin_round();
        ++stats.rounds;
        long fired = 0, skipped = 0;
        for (const Trigger& t : triggers) {
            FireResult r = fire(state, t, deps, budget.max_depth);
            switch (r) {
            case FireResult::Fired:
                ++fired;
                if (t.is_fd) {
                    ++stats.fd_firings;
                    ++stats.merges;
                } else {
                    ++stats.tgd_firings;
                }
                break;
            case FireResult::DepthSkipped:
                ++skipped;
                stats.depth_skipped = true;
                carried.push_back(t);
                break;
            case FireResult::Conflict:
                result.outcome = ChaseOutcome::FdConflict;
                return result;
            case FireResult::Inactive:
                break;
            }
            if (static_cast<long>(state.instance().size()) > budget.max_facts) {
                stats.facts_overflow = true;
                result.outcome = ChaseOutcome::BudgetExhausted;
                return result;
            }
        }
        for (const auto& f : state.instance().all_facts())
            stats.max_depth_seen = std::max(stats.max_depth_seen, state.depth_of(f));

        if (match_hook && match_hook(state)) {
            result.outcome = ChaseOutcome::StoppedEarly;
            return result;
        }
        if (fired == 0) {
            result.outcome =
                skipped > 0 ? ChaseOutcome::BudgetExhausted : ChaseOutcome::Saturated;
            return result;
        }
    }
}

const char* to_string(ChaseOutcome outcome) {
    switch (outcome) {
    case ChaseOutcome::Saturated: return "saturated";
    case ChaseOutcome::BudgetExhausted: return "budget-exhausted";
    case ChaseOutcome::FdConflict: return "fd-conflict";
    case ChaseOutcome::StoppedEarly: return "stopped-early";
    }
    return "?";
}

std::string export_trace(const ChaseResult& result, TraceFormat format) {
    const ChaseState& state = result.state;
    if (format == TraceFormat::Json) {
        json rounds = json::array();
        for (const auto& round : state.log()) {
            json firings = json::array();
            for (const auto& f : round.firings) {
                json body = json::array(), produced = json::array();
                for (const auto& b : f.body) body.push_back(state.canon(b).to_string());
                for (const auto& p : f.produced) produced.push_back(state.canon(p).to_string());
                firings.push_back({{"dep", f.dep_index}, {"body", body}, {"produced", produced}});
            }
            json merges = json::array();
            for (const auto& m : round.merges)
                merges.push_back({{"from", state.canon(m.from).to_string()},
                                  {"to", state.canon(m.to).to_string()}});
            rounds.push_back({{"index", round.index}, {"firings", firings}, {"merges", merges}});
        }
        json facts = json::array();
        for (const auto& f : state.instance().all_facts()) facts.push_back(f.to_string());
        json out = {{"rounds", rounds},
                    {"facts", facts},
                    {"merges", result.stats.merges},
                    {"outcome", to_string(result.outcome)}};
        return out.dump(2) + "\n";
    }

    // DOT: one node per fact, provenance edges from body facts to produced facts.
    std::ostringstream out;
    out << "digraph chase {\n";
    std::set<std::string> nodes;
    auto node_id = [&](const Fact& f) {
        std::string label;
        for (char c : state.canon(f).to_string()) {
            if (c == '"') label += '\\';
            label += c;
        }
        nodes.insert(label);
        return label;
    };
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& f : state.instance().all_facts()) node_id(f);
    for (const auto& round : state.log())
        for (const auto& firing : round.firings)
            for (const auto& b : firing.body)
                for (const auto& p : firing.produced)
                    edges.emplace_back(node_id(b), node_id(p));
    for (const auto& n : nodes) out << "  \"" << n << "\";\n";
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (const auto& [a, b] : edges) out << "  \"" << a << "\" -> \"" << b << "\";\n";
    out << "}\n";
    return out.str();
}

} // namespace rbqa
