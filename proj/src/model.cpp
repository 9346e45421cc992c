#include "rbqa/model.hpp"

#include <algorithm>
#include <cctype>

namespace rbqa {

namespace {

bool is_numeric(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

} // namespace

std::string Value::to_string() const {
    switch (kind()) {
    case ValueKind::Constant: {
        const std::string& t = symbol_text(id());
        return is_numeric(t) ? t : "\"" + t + "\"";
    }
    case ValueKind::Null:
        return "_" + std::to_string(id());
    case ValueKind::Frozen:
        return "~" + symbol_text(id());
    }
    return "?";
}

std::string Fact::to_string() const {
    std::string out = symbol_text(rel) + "(";
    for (std::size_t i = 0; i < tuple.size(); ++i) {
        if (i) out += ",";
        out += tuple[i].to_string();
    }
    return out + ")";
}

std::string Term::to_string() const {
    if (kind == TermKind::Var) return symbol_text(sym);
    const std::string& t = symbol_text(sym);
    return is_numeric(t) ? t : "\"" + t + "\"";
}

bool Signature::has(Symbol rel) const {
    return arity(rel).has_value();
}

std::optional<int> Signature::arity(Symbol rel) const {
    for (const auto& [r, a] : relations)
        if (r == rel) return a;
    return std::nullopt;
}

void Signature::add(Symbol rel, int a) {
    if (has(rel)) throw ModelError("DuplicateRelation", "relation already declared: " + symbol_text(rel));
    relations.emplace_back(rel, a);
}

bool Instance::add(Fact f) {
    auto [it, inserted] = rels_[f.rel].insert(std::move(f.tuple));
    if (inserted) {
        ++size_;
        std::uint64_t version = ++version_[f.rel];
        // Keep an existing index current instead of rebuilding it later.
        auto iit = index_.find(f.rel);
        if (iit != index_.end() && iit->second.version == version - 1) {
            PositionIndex& idx = iit->second;
            const Tuple& t = *it;
            if (idx.by_pos.size() < t.size()) idx.by_pos.resize(t.size());
            for (std::size_t p = 0; p < t.size(); ++p) idx.by_pos[p][t[p]].push_back(t);
            idx.version = version;
        }
    }
    return inserted;
}

const std::vector<Tuple>* Instance::tuples_with(Symbol rel, std::size_t pos,
                                                const Value& v) const {
    auto rit = rels_.find(rel);
    if (rit == rels_.end()) return nullptr;
    std::uint64_t version = 0;
    if (auto vit = version_.find(rel); vit != version_.end()) version = vit->second;
    PositionIndex& idx = index_[rel];
    if (idx.by_pos.empty() || idx.version != version) {
        idx.by_pos.clear();
        if (!rit->second.empty()) idx.by_pos.resize(rit->second.begin()->size());
        for (const auto& t : rit->second)
            for (std::size_t p = 0; p < t.size(); ++p) idx.by_pos[p][t[p]].push_back(t);
        idx.version = version;
    }
    if (pos >= idx.by_pos.size()) return nullptr;
    auto it = idx.by_pos[pos].find(v);
    return it == idx.by_pos[pos].end() ? nullptr : &it->second;
}

bool Instance::contains(const Fact& f) const {
    auto it = rels_.find(f.rel);
    return it != rels_.end() && it->second.count(f.tuple) > 0;
}

const std::set<Tuple>& Instance::tuples(Symbol rel) const {
    static const std::set<Tuple> empty;
    auto it = rels_.find(rel);
    return it == rels_.end() ? empty : it->second;
}

std::vector<Fact> Instance::all_facts() const {
    std::vector<Fact> out;
    out.reserve(size_);
    for (const auto& [rel, tuples] : rels_)
        for (const auto& t : tuples)
            out.push_back(Fact{rel, t});
    return out;
}

std::set<Value> Instance::active_domain() const {
    std::set<Value> dom;
    for (const auto& [rel, tuples] : rels_)
        for (const auto& t : tuples)
            dom.insert(t.begin(), t.end());
    return dom;
}

std::set<Symbol> ConjunctiveQuery::variables() const {
    std::set<Symbol> vars;
    for (const auto& a : atoms)
        for (const auto& t : a.terms)
            if (t.is_var()) vars.insert(t.sym);
    return vars;
}

std::set<Symbol> ConjunctiveQuery::constants() const {
    std::set<Symbol> cs;
    for (const auto& a : atoms)
        for (const auto& t : a.terms)
            if (!t.is_var()) cs.insert(t.sym);
    return cs;
}

std::string ConjunctiveQuery::to_string() const {
    std::string out = symbol_text(name) + "(";
    for (std::size_t i = 0; i < free_vars.size(); ++i) {
        if (i) out += ",";
        out += symbol_text(free_vars[i]);
    }
    out += ") :- ";
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (i) out += ", ";
        out += symbol_text(atoms[i].rel) + "(";
        for (std::size_t j = 0; j < atoms[i].terms.size(); ++j) {
            if (j) out += ",";
            out += atoms[i].terms[j].to_string();
        }
        out += ")";
    }
    return out;
}

void check_query(const ConjunctiveQuery& q, const Signature& sig) {
    if (q.atoms.empty())
        throw ModelError("EmptyQuery", "query " + symbol_text(q.name) + " has no atoms");
    for (const auto& atom : q.atoms) {
        auto a = sig.arity(atom.rel);
        if (!a)
            throw ModelError("UnknownRelation", "unknown relation " + symbol_text(atom.rel));
        if (static_cast<int>(atom.terms.size()) != *a)
            throw ModelError("ArityMismatch",
                             "relation " + symbol_text(atom.rel) + " used with arity " +
                                 std::to_string(atom.terms.size()) + ", declared " + std::to_string(*a));
    }
    auto vars = q.variables();
    for (Symbol v : q.free_vars)
        if (!vars.count(v))
            throw ModelError("FreeVarNotUsed",
                             "free variable " + symbol_text(v) + " occurs in no atom");
}

Instance canonical_db(const ConjunctiveQuery& q, const Signature& sig) {
    check_query(q, sig);
    std::set<Symbol> free(q.free_vars.begin(), q.free_vars.end());
    std::map<Symbol, Value> values;
    std::uint32_t next_null = 0;
    Instance inst;
    for (const auto& atom : q.atoms) {
        Tuple tuple;
        tuple.reserve(atom.terms.size());
        for (const auto& t : atom.terms) {
            if (!t.is_var()) {
                tuple.push_back(Value::constant(t.sym));
                continue;
            }
            auto it = values.find(t.sym);
            if (it == values.end()) {
                Value v = free.count(t.sym) ? Value::frozen(t.sym) : Value::null(next_null++);
                it = values.emplace(t.sym, v).first;
            }
            tuple.push_back(it->second);
        }
        inst.add(Fact{atom.rel, std::move(tuple)});
    }
    return inst;
}

namespace {

struct HomSearch {
    const ConjunctiveQuery& q;
    const Instance& target;
    const std::function<bool(const Assignment&)>& fn;
    Assignment assignment;
    std::vector<bool> done;
    bool stopped = false;

    HomSearch(const ConjunctiveQuery& q_, const Instance& target_,
              const std::function<bool(const Assignment&)>& fn_)
        : q(q_), target(target_), fn(fn_), done(q_.atoms.size(), false) {}

    // Number of already-bound terms; used for most-constrained-first ordering.
    int bound_count(const QueryAtom& atom) const {
        int n = 0;
        for (const auto& t : atom.terms)
            if (!t.is_var() || assignment.count(t.sym)) ++n;
        return n;
    }

    int pick_atom() const {
        int best = -1, best_bound = -1;
        std::size_t best_cands = 0;
        for (std::size_t i = 0; i < q.atoms.size(); ++i) {
            if (done[i]) continue;
            int b = bound_count(q.atoms[i]);
            std::size_t cands = target.tuples(q.atoms[i].rel).size();
            if (b > best_bound || (b == best_bound && cands < best_cands)) {
                best = static_cast<int>(i);
                best_bound = b;
                best_cands = cands;
            }
        }
        return best;
    }

    // Candidate tuples for an atom: use the position index when some term is
    // already bound, otherwise the whole relation.
    const std::vector<Tuple>* indexed_candidates(const QueryAtom& atom) const {
        for (std::size_t i = 0; i < atom.terms.size(); ++i) {
            const Term& term = atom.terms[i];
            if (!term.is_var())
                return target.tuples_with(atom.rel, i, Value::constant(term.sym));
            auto it = assignment.find(term.sym);
            if (it != assignment.end()) return target.tuples_with(atom.rel, i, it->second);
        }
        return nullptr;
    }

    void search() {
        if (stopped) return;
        int idx = pick_atom();
        if (idx < 0) {
            if (!fn(assignment)) stopped = true;
            return;
        }
        const QueryAtom& atom = q.atoms[idx];
        done[idx] = true;
        bool has_bound = false;
        for (const auto& term : atom.terms)
            if (!term.is_var() || assignment.count(term.sym)) has_bound = true;
        static const std::vector<Tuple> none;
        const std::vector<Tuple>* indexed = has_bound ? indexed_candidates(atom) : nullptr;
        if (has_bound && indexed == nullptr) indexed = &none;
        auto scan = [&](const Tuple& t) {
            if (t.size() != atom.terms.size()) return;
            std::vector<Symbol> newly;
            bool ok = true;
            for (std::size_t i = 0; i < t.size() && ok; ++i) {
                const Term& term = atom.terms[i];
                if (!term.is_var()) {
                    ok = (t[i] == Value::constant(term.sym));
                } else {
                    auto it = assignment.find(term.sym);
                    if (it == assignment.end()) {
                        assignment.emplace(term.sym, t[i]);
                        newly.push_back(term.sym);
                    } else {
                        ok = (it->second == t[i]);
                    }
                }
            }
            if (ok) search();
            for (Symbol v : newly) assignment.erase(v);
        };
        if (indexed != nullptr) {
            for (const Tuple& t : *indexed) {
                scan(t);
                if (stopped) break;
            }
        } else {
            for (const Tuple& t : target.tuples(atom.rel)) {
                scan(t);
                if (stopped) break;
            }
        }
        done[idx] = false;
    }
};

} // namespace

void for_each_homomorphism(const ConjunctiveQuery& q, const Instance& target,
                           const Assignment& fixed,
                           const std::function<bool(const Assignment&)>& fn) {
    auto vars = q.variables();
    for (const auto& [v, val] : fixed)
        if (!vars.count(v))
            throw ModelError("UnknownVariable",
                             "fixed assignment mentions " + symbol_text(v) + " not in query");
    HomSearch search(q, target, fn);
    search.assignment = fixed;
    search.search();
}

std::optional<Assignment> find_homomorphism(const ConjunctiveQuery& q, const Instance& target,
                                            const Assignment& fixed) {
    std::optional<Assignment> result;
    for_each_homomorphism(q, target, fixed, [&](const Assignment& a) {
        result = a;
        return false;
    });
    return result;
}

std::set<Tuple> eval_cq(const ConjunctiveQuery& q, const Instance& inst) {
    std::set<Tuple> out;
    for_each_homomorphism(q, inst, {}, [&](const Assignment& a) {
        Tuple row;
        row.reserve(q.free_vars.size());
        for (Symbol v : q.free_vars) row.push_back(a.at(v));
        out.insert(std::move(row));
        return true;
    });
    return out;
}

std::set<Tuple> eval_cq(const ConjunctiveQuery& q, const Instance& inst, const Signature& sig) {
    check_query(q, sig);
    return eval_cq(q, inst);
}

} // namespace rbqa
