#include "rbqa/schema.hpp"

#include <algorithm>

namespace rbqa {

std::vector<int> AccessMethod::outputs(int arity) const {
    std::vector<int> out;
    for (int p = 1; p <= arity; ++p)
        if (std::find(inputs.begin(), inputs.end(), p) == inputs.end()) out.push_back(p);
    return out;
}

const AccessMethod* Schema::method(Symbol name) const {
    for (const auto& m : methods)
        if (m.name == name) return &m;
    return nullptr;
}

std::string Diagnostic::to_string() const {
    std::string out;
    if (span) out += std::to_string(span->line) + ":" + std::to_string(span->column) + ": ";
    return out + code + ": " + message;
}

std::vector<Diagnostic> validate_schema(const Schema& s) {
    std::vector<Diagnostic> diags;
    auto report = [&](std::string code, std::string msg) {
        diags.push_back(Diagnostic{std::move(code), std::move(msg), std::nullopt});
    };

    std::set<Symbol> rel_names;
    for (const auto& [rel, arity] : s.signature.relations) {
        if (!rel_names.insert(rel).second)
            report("DuplicateRelation", "relation " + symbol_text(rel) + " declared twice");
        if (arity < 0) report("InvalidArity", "relation " + symbol_text(rel) + " has negative arity");
    }

    std::set<Symbol> method_names;
    for (const auto& m : s.methods) {
        if (!method_names.insert(m.name).second)
            report("DuplicateMethod", "method " + symbol_text(m.name) + " declared twice");
        auto arity = s.signature.arity(m.relation);
        if (!arity) {
            report("UnknownRelation",
                   "method " + symbol_text(m.name) + " on undeclared relation " +
                       symbol_text(m.relation));
            continue;
        }
        for (int p : m.inputs)
            if (p < 1 || p > *arity)
                report("InvalidPosition", "method " + symbol_text(m.name) + " input position " +
                                              std::to_string(p) + " out of range");
        if (m.bounded() && m.bound < 1)
            report("InvalidBound",
                   "method " + symbol_text(m.name) + " has bound " + std::to_string(m.bound));
    }

    auto check_atom = [&](const TgdAtom& a, const char* where) {
        auto arity = s.signature.arity(a.rel);
        if (!arity) {
            report("UnknownRelation",
                   std::string(where) + " atom on undeclared relation " + symbol_text(a.rel));
            return;
        }
        if (static_cast<int>(a.vars.size()) != *arity)
            report("ArityMismatch", std::string(where) + " atom " + a.to_string() +
                                        " does not match declared arity " + std::to_string(*arity));
    };

    for (const auto& dep : s.constraints) {
        if (const auto* tgd = std::get_if<Tgd>(&dep)) {
            if (tgd->body.empty() || tgd->head.empty())
                report("EmptyDependency", "dependency with empty body or head");
            for (const auto& a : tgd->body) check_atom(a, "body");
            for (const auto& a : tgd->head) check_atom(a, "head");
            auto body = tgd->body_vars();
            // Head-only variables are existential; nothing else to check here,
            // since constraint atoms cannot carry constants by construction.
            (void)body;
        } else {
            const Fd& fd = std::get<Fd>(dep);
            auto arity = s.signature.arity(fd.rel);
            if (!arity) {
                report("UnknownRelation", "fd on undeclared relation " + symbol_text(fd.rel));
                continue;
            }
            auto in_range = [&](int p) { return p >= 1 && p <= *arity; };
            if (!in_range(fd.determined))
                report("InvalidPosition", "fd " + fd.to_string() + " determined position out of range");
            for (int p : fd.determinant)
                if (!in_range(p))
                    report("InvalidPosition", "fd " + fd.to_string() + " determinant position out of range");
            if (fd.determinant.empty())
                report("EmptyDeterminant", "fd " + fd.to_string() + " has an empty determinant");
        }
    }
    return diags;
}

Schema elim_ub(Schema s) {
    for (auto& m : s.methods)
        if (m.bound_kind == BoundKind::ResultBound) m.bound_kind = BoundKind::ResultLowerBound;
    return s;
}

Schema choice_simplify(Schema s) {
    for (auto& m : s.methods)
        if (m.bounded()) m.bound = 1;
    return s;
}

Symbol view_relation_name(Symbol relation, Symbol method) {
    return intern(symbol_text(relation) + "__" + symbol_text(method));
}

Symbol primed(Symbol rel) { return intern(symbol_text(rel) + "'"); }

nlohmann::json SimplificationReport::to_json() const {
    nlohmann::json out;
    switch (kind) {
    case SimplKind::ExistenceCheck: out["kind"] = "existence-check"; break;
    case SimplKind::FdSimplify: out["kind"] = "fd"; break;
    case SimplKind::Choice: out["kind"] = "choice"; break;
    case SimplKind::ElimUB: out["kind"] = "elim-ub"; break;
    }
    nlohmann::json rels = nlohmann::json::array();
    for (const auto& [rel, arity] : new_relations)
        rels.push_back({{"name", symbol_text(rel)}, {"arity", arity}});
    out["new_relations"] = rels;
    nlohmann::json cons = nlohmann::json::array();
    for (const auto& c : new_constraints) cons.push_back(dependency_to_string(c));
    out["new_constraints"] = cons;
    nlohmann::json methods = nlohmann::json::object();
    for (const auto& [from, to] : method_map) methods[symbol_text(from)] = symbol_text(to);
    out["method_map"] = methods;
    return out;
}

namespace {

// Shared construction: the view relation covers `covered` (input positions
// first, then the rest in relation order), with the two linking IDs
//   R(x,y,z) -> R_mt(x,y)      and      R_mt(x,y) -> exists z. R(x,y,z).
std::pair<Schema, SimplificationReport> simplify_with_views(
    const Schema& s, SimplKind kind,
    const std::function<std::vector<int>(const AccessMethod&, int)>& covered_positions) {
    Schema out;
    out.signature = s.signature;
    out.constraints = s.constraints;
    SimplificationReport report;
    report.kind = kind;

    for (const auto& m : s.methods) {
        if (!m.bounded()) {
            out.methods.push_back(m);
            continue;
        }
        int arity = s.signature.arity(m.relation).value();
        std::vector<int> covered = covered_positions(m, arity);
        Symbol view = view_relation_name(m.relation, m.name);
        if (out.signature.has(view))
            throw ModelError("NameCollision", "view relation name already taken: " + symbol_text(view));
        out.signature.add(view, static_cast<int>(covered.size()));
        report.new_relations.emplace_back(view, static_cast<int>(covered.size()));

        // Variables v1..vn for the base relation; the view atom picks the
        // covered subset in order.
        std::vector<Symbol> base_vars;
        for (int p = 1; p <= arity; ++p) base_vars.push_back(intern("v" + std::to_string(p)));
        TgdAtom base_atom{m.relation, base_vars};
        TgdAtom view_atom{view, {}};
        for (int p : covered) view_atom.vars.push_back(base_vars[p - 1]);

        Tgd relation_to_view{{base_atom}, {view_atom}};
        Tgd view_to_relation{{view_atom}, {base_atom}};
        out.constraints.emplace_back(relation_to_view);
        out.constraints.emplace_back(view_to_relation);
        report.new_constraints.emplace_back(relation_to_view);
        report.new_constraints.emplace_back(view_to_relation);

        AccessMethod replacement;
        replacement.name = intern(symbol_text(m.name) + "'");
        replacement.relation = view;
        replacement.bound_kind = BoundKind::None;
        for (std::size_t i = 0; i < covered.size(); ++i)
            if (std::find(m.inputs.begin(), m.inputs.end(), covered[i]) != m.inputs.end())
                replacement.inputs.push_back(static_cast<int>(i + 1));
        out.methods.push_back(replacement);
        report.method_map[m.name] = replacement.name;

        ViewInfo info;
        info.base = m.relation;
        info.method = m.name;
        info.base_positions = covered;
        info.view_inputs = replacement.inputs;
        report.views[view] = info;
    }
    return {std::move(out), std::move(report)};
}

} // namespace

std::pair<Schema, SimplificationReport> existence_check_simplify(const Schema& s) {
    return simplify_with_views(s, SimplKind::ExistenceCheck,
                               [](const AccessMethod& m, int) { return m.inputs; });
}

std::pair<Schema, SimplificationReport> fd_simplify(const Schema& s) {
    std::vector<Fd> fds = s.fds();
    return simplify_with_views(
        s, SimplKind::FdSimplify, [&fds](const AccessMethod& m, int arity) {
            std::set<int> base(m.inputs.begin(), m.inputs.end());
            std::set<int> closure = detby(fds, m.relation, base);
            std::vector<int> covered = m.inputs; // inputs first, in relation order
            for (int p = 1; p <= arity; ++p)
                if (closure.count(p) && !base.count(p)) covered.push_back(p);
            return covered;
        });
}

} // namespace rbqa
