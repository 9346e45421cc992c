#include "rbqa/constraints.hpp"

#include "rbqa/union_find.hpp"

#include <algorithm>

namespace rbqa {

bool prefer_as_representative(Value a, Value b) {
    auto rank = [](Value v) {
        switch (v.kind()) {
        case ValueKind::Constant: return 0;
        case ValueKind::Frozen: return 1;
        case ValueKind::Null: return 2;
        }
        return 3;
    };
    if (rank(a) != rank(b)) return rank(a) < rank(b);
    return a.id() < b.id();
}

Value ValueUnionFind::find(Value v) const {
    auto it = parent_.find(v);
    if (it == parent_.end()) return v;
    Value root = find(it->second);
    if (root != it->second) it->second = root;
    return root;
}

ValueUnionFind::MergeResult ValueUnionFind::merge(Value a, Value b) {
    Value ra = find(a), rb = find(b);
    if (ra == rb) return {false, false, ra};
    if (ra.is_constant() && rb.is_constant()) return {false, true, ra};
    if (!prefer_as_representative(ra, rb)) std::swap(ra, rb);
    parent_.insert_or_assign(rb, ra);
    return {true, false, ra};
}

Tuple ValueUnionFind::map(const Tuple& t) const {
    Tuple out;
    out.reserve(t.size());
    for (Value v : t) out.push_back(find(v));
    return out;
}

std::string TgdAtom::to_string() const {
    std::string out = symbol_text(rel) + "(";
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (i) out += ",";
        out += symbol_text(vars[i]);
    }
    return out + ")";
}

std::set<Symbol> Tgd::body_vars() const {
    std::set<Symbol> vars;
    for (const auto& a : body) vars.insert(a.vars.begin(), a.vars.end());
    return vars;
}

std::set<Symbol> Tgd::head_vars() const {
    std::set<Symbol> vars;
    for (const auto& a : head) vars.insert(a.vars.begin(), a.vars.end());
    return vars;
}

std::set<Symbol> Tgd::exported_vars() const {
    auto b = body_vars();
    std::set<Symbol> out;
    for (Symbol v : head_vars())
        if (b.count(v)) out.insert(v);
    return out;
}

bool Tgd::is_full() const {
    auto b = body_vars();
    for (Symbol v : head_vars())
        if (!b.count(v)) return false;
    return true;
}

namespace {

bool has_repeated_vars(const TgdAtom& a) {
    std::set<Symbol> seen;
    for (Symbol v : a.vars)
        if (!seen.insert(v).second) return true;
    return false;
}

} // namespace

bool Tgd::is_id() const {
    return body.size() == 1 && head.size() == 1 && !has_repeated_vars(body[0]) &&
           !has_repeated_vars(head[0]);
}

bool Tgd::is_guarded() const {
    auto all = body_vars();
    for (const auto& a : body) {
        std::set<Symbol> guard(a.vars.begin(), a.vars.end());
        if (std::includes(guard.begin(), guard.end(), all.begin(), all.end())) return true;
    }
    return false;
}

bool Tgd::is_frontier_guarded() const {
    auto frontier = exported_vars();
    if (frontier.empty()) return true;
    for (const auto& a : body) {
        std::set<Symbol> guard(a.vars.begin(), a.vars.end());
        if (std::includes(guard.begin(), guard.end(), frontier.begin(), frontier.end()))
            return true;
    }
    return false;
}

std::string Tgd::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (i) out += ", ";
        out += body[i].to_string();
    }
    out += " -> ";
    for (std::size_t i = 0; i < head.size(); ++i) {
        if (i) out += ", ";
        out += head[i].to_string();
    }
    return out;
}

std::string Fd::to_string() const {
    std::string out = symbol_text(rel) + ": ";
    for (std::size_t i = 0; i < determinant.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(determinant[i]);
    }
    return out + " -> " + std::to_string(determined);
}

std::string dependency_to_string(const Dependency& d) {
    if (const auto* t = std::get_if<Tgd>(&d)) return t->to_string();
    return "fd " + std::get<Fd>(d).to_string();
}

std::string to_string(ConstraintClass cls, int width) {
    switch (cls) {
    case ConstraintClass::FdOnly: return "FdOnly";
    case ConstraintClass::IdOnly: return "BoundedWidthId(" + std::to_string(width) + ")";
    case ConstraintClass::UidFd: return "UidFd";
    case ConstraintClass::FrontierGuarded: return "FrontierGuarded";
    case ConstraintClass::GeneralTgd: return "GeneralTgd";
    case ConstraintClass::Mixed: return "Mixed";
    }
    return "?";
}

ConstraintProfile classify(std::span<const Dependency> deps) {
    ConstraintProfile profile;
    bool any_fd = false, any_tgd = false;
    bool all_ids = true, all_uids = true, all_fg = true;
    for (const auto& dep : deps) {
        DependencyFlags f;
        if (const auto* tgd = std::get_if<Tgd>(&dep)) {
            any_tgd = true;
            f.is_id = tgd->is_id();
            f.is_uid = tgd->is_uid();
            f.is_full = tgd->is_full();
            f.is_guarded = tgd->is_guarded();
            f.is_frontier_guarded = tgd->is_frontier_guarded();
            f.width = tgd->width();
            if (f.is_id) profile.width = std::max(profile.width, f.width);
            all_ids = all_ids && f.is_id;
            all_uids = all_uids && f.is_uid;
            all_fg = all_fg && f.is_frontier_guarded;
        } else {
            any_fd = true;
        }
        profile.flags.push_back(f);
    }
    if (!any_tgd && !any_fd) {
        profile.cls = ConstraintClass::IdOnly;
    } else if (!any_tgd) {
        profile.cls = ConstraintClass::FdOnly;
    } else if (!any_fd) {
        profile.cls = all_ids ? ConstraintClass::IdOnly
                              : (all_fg ? ConstraintClass::FrontierGuarded
                                        : ConstraintClass::GeneralTgd);
    } else {
        profile.cls = all_uids ? ConstraintClass::UidFd : ConstraintClass::Mixed;
    }
    return profile;
}

std::set<int> detby(std::span<const Fd> fds, Symbol rel, const std::set<int>& base) {
    std::set<int> closure = base;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& fd : fds) {
            if (fd.rel != rel || closure.count(fd.determined)) continue;
            bool applies = std::all_of(fd.determinant.begin(), fd.determinant.end(),
                                       [&](int p) { return closure.count(p) > 0; });
            if (applies) {
                closure.insert(fd.determined);
                changed = true;
            }
        }
    }
    return closure;
}

std::vector<Fd> fds_of(std::span<const Dependency> deps) {
    std::vector<Fd> out;
    for (const auto& d : deps)
        if (const auto* fd = std::get_if<Fd>(&d)) out.push_back(*fd);
    return out;
}

std::vector<Tgd> tgds_of(std::span<const Dependency> deps) {
    std::vector<Tgd> out;
    for (const auto& d : deps)
        if (const auto* t = std::get_if<Tgd>(&d)) out.push_back(*t);
    return out;
}

MinimizedQuery minimize_query_under_fds(const ConjunctiveQuery& q, std::span<const Fd> fds,
                                        const Signature& sig) {
    check_query(q, sig);
    // Work at the term level so original variable names survive the merge.
    ValueUnionFind uf;
    std::map<Symbol, std::uint32_t> bound_index; // bound var -> null id
    std::set<Symbol> free(q.free_vars.begin(), q.free_vars.end());
    auto term_value = [&](const Term& t) -> Value {
        if (!t.is_var()) return Value::constant(t.sym);
        if (free.count(t.sym)) return Value::frozen(t.sym);
        auto it = bound_index.find(t.sym);
        if (it == bound_index.end())
            it = bound_index.emplace(t.sym, static_cast<std::uint32_t>(bound_index.size())).first;
        return Value::null(it->second);
    };

    std::vector<std::pair<Symbol, Tuple>> atoms;
    for (const auto& a : q.atoms) {
        Tuple t;
        for (const auto& term : a.terms) t.push_back(term_value(term));
        atoms.emplace_back(a.rel, std::move(t));
    }

    MinimizedQuery result;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& fd : fds) {
            for (std::size_t i = 0; i < atoms.size(); ++i) {
                if (atoms[i].first != fd.rel) continue;
                for (std::size_t j = i + 1; j < atoms.size(); ++j) {
                    if (atoms[j].first != fd.rel) continue;
                    const Tuple& a = atoms[i].second;
                    const Tuple& b = atoms[j].second;
                    bool agree = std::all_of(fd.determinant.begin(), fd.determinant.end(),
                                             [&](int p) { return uf.same(a[p - 1], b[p - 1]); });
                    if (!agree || uf.same(a[fd.determined - 1], b[fd.determined - 1])) continue;
                    auto m = uf.merge(a[fd.determined - 1], b[fd.determined - 1]);
                    if (m.conflict) {
                        result.unsatisfiable = true;
                        return result;
                    }
                    changed = changed || m.merged;
                }
            }
        }
    }

    // Pick the term each merged class shows in atoms. A class containing a
    // free variable keeps that variable so the query stays well-formed; its
    // pin to a constant, if any, is reported through head_terms instead.
    std::map<std::uint32_t, Symbol> null_name;
    for (const auto& [var, id] : bound_index) null_name[id] = var;
    auto class_free_var = [&](Value root) -> std::optional<Symbol> {
        for (Symbol fv : q.free_vars)
            if (uf.same(Value::frozen(fv), root)) return fv;
        return std::nullopt;
    };
    auto atom_term = [&](Value raw) -> Term {
        Value root = uf.find(raw);
        if (auto fv = class_free_var(root)) return Term::var(*fv);
        if (root.is_constant()) return Term::constant(root.id());
        return Term::var(null_name.at(root.id()));
    };

    for (Symbol fv : q.free_vars) {
        Value root = uf.find(Value::frozen(fv));
        if (root.is_constant())
            result.head_terms[fv] = Term::constant(root.id());
        else
            result.head_terms[fv] = atom_term(root);
    }

    result.query.name = q.name;
    for (Symbol fv : q.free_vars) result.query.free_vars.push_back(atom_term(Value::frozen(fv)).sym);
    // Preserve the original atom order, dropping duplicates created by merges.
    std::vector<QueryAtom> ordered;
    for (const auto& [rel, tuple] : atoms) {
        QueryAtom atom{rel, {}};
        for (Value v : tuple) atom.terms.push_back(atom_term(v));
        if (std::find(ordered.begin(), ordered.end(), atom) == ordered.end())
            ordered.push_back(std::move(atom));
    }
    result.query.atoms = std::move(ordered);
    return result;
}

} // namespace rbqa
